//! Triangle meshes: storage, validation and the plain-text exchange
//! format (`nodes` / `triangles` / `boundary` / optional `crack`
//! sections, whitespace-separated decimals).

use crate::error::{Error, Result};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Boundary portion labels used by the benchmark setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Bottom,
    Top,
    Left,
    Right,
    Crack,
}

impl FromStr for BoundaryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottom" => Ok(Self::Bottom),
            "top" => Ok(Self::Top),
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            "crack" => Ok(Self::Crack),
            other => Err(Error::Mesh(format!("unknown boundary label {other:?}"))),
        }
    }
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Bottom => "bottom",
            Self::Top => "top",
            Self::Left => "left",
            Self::Right => "right",
            Self::Crack => "crack",
        };
        f.write_str(s)
    }
}

/// A conforming P1 triangle mesh with labeled boundary edges and an
/// optional set of nodes lying on an internal crack segment.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<(usize, usize, BoundaryLabel)>,
    pub crack_nodes: Vec<usize>,
}

impl Mesh2D {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Twice the signed area of a triangle.
    pub fn double_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.nodes[i], self.nodes[j], self.nodes[k]);
        (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.double_area(t)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for n in &self.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(n[d]);
                hi[d] = hi[d].max(n[d]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    /// P1 shape gradients (constant per element) and the element area.
    pub fn shape_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.nodes[i], self.nodes[j], self.nodes[k]);
        let d = self.double_area(t);
        let grads = [
            [(b[1] - c[1]) / d, (c[0] - b[0]) / d],
            [(c[1] - a[1]) / d, (a[0] - c[0]) / d],
            [(a[1] - b[1]) / d, (b[0] - a[0]) / d],
        ];
        (grads, 0.5 * d)
    }

    /// Nodes incident to boundary edges with the given label.
    pub fn boundary_nodes(&self, label: BoundaryLabel) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary
            .iter()
            .filter(|(_, _, l)| *l == label)
            .flat_map(|(i, j, _)| [*i, *j])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        for (t, tri) in self.triangles.iter().enumerate() {
            for idx in tri {
                if *idx >= n {
                    return Err(Error::Mesh(format!(
                        "triangle {t} references node {idx} out of {n}"
                    )));
                }
            }
            if self.double_area(t) <= 0.0 {
                return Err(Error::Mesh(format!(
                    "triangle {t} has non-positive area {}",
                    self.area(t)
                )));
            }
        }
        for (i, j, label) in &self.boundary {
            if *i >= n || *j >= n {
                return Err(Error::Mesh(format!(
                    "boundary edge ({i}, {j}, {label}) references missing node"
                )));
            }
        }
        for c in &self.crack_nodes {
            if *c >= n {
                return Err(Error::Mesh(format!("crack node {c} out of range")));
            }
        }
        // conformity: every interior edge is shared by exactly two
        // triangles, boundary edges by one
        let mut edge_count = std::collections::HashMap::new();
        for tri in &self.triangles {
            for e in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                *edge_count.entry(key).or_insert(0usize) += 1;
            }
        }
        for (edge, count) in &edge_count {
            if *count > 2 {
                return Err(Error::Mesh(format!(
                    "edge {edge:?} shared by {count} triangles"
                )));
            }
        }
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        fn take<'a>(
            tokens: &mut std::str::SplitWhitespace<'a>,
            what: &str,
        ) -> Result<&'a str> {
            tokens
                .next()
                .ok_or_else(|| Error::Mesh(format!("unexpected end of mesh file, expected {what}")))
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Mesh(format!("invalid {what}: {s:?}")))
        };
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Mesh(format!("invalid {what}: {s:?}")))
        };

        let kw = take(&mut tokens, "'nodes'")?;
        if kw != "nodes" {
            return Err(Error::Mesh(format!("expected 'nodes', found {kw:?}")));
        }
        let n = parse_usize(take(&mut tokens,"node count")?, "node count")?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let x = parse_f64(take(&mut tokens,"node x")?, "node coordinate")?;
            let y = parse_f64(take(&mut tokens,"node y")?, "node coordinate")?;
            nodes.push([x, y]);
        }

        let kw = take(&mut tokens, "'triangles'")?;
        if kw != "triangles" {
            return Err(Error::Mesh(format!("expected 'triangles', found {kw:?}")));
        }
        let m = parse_usize(take(&mut tokens,"triangle count")?, "triangle count")?;
        let mut triangles = Vec::with_capacity(m);
        for _ in 0..m {
            let i = parse_usize(take(&mut tokens,"triangle index")?, "triangle index")?;
            let j = parse_usize(take(&mut tokens,"triangle index")?, "triangle index")?;
            let k = parse_usize(take(&mut tokens,"triangle index")?, "triangle index")?;
            triangles.push([i, j, k]);
        }

        let kw = take(&mut tokens, "'boundary'")?;
        if kw != "boundary" {
            return Err(Error::Mesh(format!("expected 'boundary', found {kw:?}")));
        }
        let k = parse_usize(take(&mut tokens,"boundary count")?, "boundary count")?;
        let mut boundary = Vec::with_capacity(k);
        for _ in 0..k {
            let i = parse_usize(take(&mut tokens,"edge index")?, "edge index")?;
            let j = parse_usize(take(&mut tokens,"edge index")?, "edge index")?;
            let label: BoundaryLabel = take(&mut tokens, "edge label")?.parse()?;
            boundary.push((i, j, label));
        }

        let mut crack_nodes = Vec::new();
        if let Some(kw) = tokens.next() {
            if kw != "crack" {
                return Err(Error::Mesh(format!("expected 'crack' or end, found {kw:?}")));
            }
            let c = parse_usize(take(&mut tokens,"crack count")?, "crack count")?;
            for _ in 0..c {
                crack_nodes.push(parse_usize(take(&mut tokens,"crack index")?, "crack index")?);
            }
        }

        let mesh = Self { nodes, triangles, boundary, crack_nodes };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "nodes {}", self.n_nodes())?;
        for n in &self.nodes {
            writeln!(f, "{:.17e} {:.17e}", n[0], n[1])?;
        }
        writeln!(f, "triangles {}", self.n_triangles())?;
        for t in &self.triangles {
            writeln!(f, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(f, "boundary {}", self.boundary.len())?;
        for (i, j, l) in &self.boundary {
            writeln!(f, "{i} {j} {l}")?;
        }
        if !self.crack_nodes.is_empty() {
            writeln!(f, "crack {}", self.crack_nodes.len())?;
            for c in &self.crack_nodes {
                writeln!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// A single unit right triangle, handy in tests.
#[cfg(test)]
pub fn unit_triangle() -> Mesh2D {
    Mesh2D {
        nodes: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles: vec![[0, 1, 2]],
        boundary: vec![
            (0, 1, BoundaryLabel::Bottom),
            (2, 0, BoundaryLabel::Left),
        ],
        crack_nodes: vec![],
    }
}
