//! Degree-of-freedom bookkeeping: free/constrained numbering for the
//! reduced systems, and the nodal field containers carried through the
//! staggered evolution.

use crate::error::{Error, Result};
use crate::mesh::Mesh2D;

/// Maps full dof indices to a contiguous free numbering, with Dirichlet
/// dofs held at prescribed values.
#[derive(Debug, Clone)]
pub struct DofMap {
    free_index: Vec<Option<usize>>,
    prescribed: Vec<Option<f64>>,
    n_free: usize,
}

impl DofMap {
    /// `n_dofs` total dofs, `constraints` as (dof, value) pairs.
    pub fn new(n_dofs: usize, constraints: &[(usize, f64)]) -> Result<Self> {
        let mut prescribed = vec![None; n_dofs];
        for (dof, value) in constraints {
            if *dof >= n_dofs {
                return Err(Error::Domain(format!(
                    "constrained dof {dof} out of range {n_dofs}"
                )));
            }
            if let Some(old) = prescribed[*dof] {
                if (old - *value) != 0.0 {
                    return Err(Error::Domain(format!(
                        "dof {dof} constrained twice with different values ({old} vs {value})"
                    )));
                }
            }
            prescribed[*dof] = Some(*value);
        }
        let mut free_index = vec![None; n_dofs];
        let mut n_free = 0;
        for dof in 0..n_dofs {
            if prescribed[dof].is_none() {
                free_index[dof] = Some(n_free);
                n_free += 1;
            }
        }
        Ok(Self { free_index, prescribed, n_free })
    }

    pub fn n_total(&self) -> usize {
        self.free_index.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn free(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.prescribed[dof].is_some()
    }

    pub fn prescribed_value(&self, dof: usize) -> Option<f64> {
        self.prescribed[dof]
    }

    /// Writes the prescribed values into a full-length vector.
    pub fn apply_values(&self, full: &mut [f64]) {
        for (dof, v) in self.prescribed.iter().enumerate() {
            if let Some(v) = v {
                full[dof] = *v;
            }
        }
    }

    /// Gathers the free part of a full-length vector.
    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (dof, idx) in self.free_index.iter().enumerate() {
            if let Some(i) = idx {
                out[*i] = full[dof];
            }
        }
        out
    }

    /// Adds a free-numbered increment into the full-length vector.
    pub fn scatter_add(&self, reduced: &[f64], full: &mut [f64], scale: f64) {
        for (dof, idx) in self.free_index.iter().enumerate() {
            if let Some(i) = idx {
                full[dof] += scale * reduced[*i];
            }
        }
    }
}

/// Nodal displacement/phase-field state plus the per-element history
/// variable used by the history-field irreversibility mode.
#[derive(Debug, Clone)]
pub struct NodalFields {
    /// interleaved (u_x, u_y) per node
    pub u: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_prev: Vec<f64>,
    /// per-element maximal tensile energy density
    pub history: Vec<f64>,
}

impl NodalFields {
    pub fn zeros(mesh: &Mesh2D) -> Self {
        Self {
            u: vec![0.0; 2 * mesh.n_nodes()],
            alpha: vec![0.0; mesh.n_nodes()],
            alpha_prev: vec![0.0; mesh.n_nodes()],
            history: vec![0.0; mesh.n_triangles()],
        }
    }

    /// Largest irreversibility violation max |<alpha - alpha_prev>_|.
    pub fn max_violation(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.alpha_prev)
            .fold(0.0f64, |m, (a, p)| m.max((p - a).max(0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbering_skips_constraints() {
        let map = DofMap::new(5, &[(1, 0.5), (3, -1.0)]).unwrap();
        assert_eq!(map.n_free(), 3);
        assert_eq!(map.free(0), Some(0));
        assert_eq!(map.free(1), None);
        assert_eq!(map.free(2), Some(1));
        assert_eq!(map.free(4), Some(2));
        assert!(map.is_constrained(3));
        assert_eq!(map.prescribed_value(3), Some(-1.0));
    }

    #[test]
    fn gather_scatter_roundtrip() {
        let map = DofMap::new(4, &[(2, 7.0)]).unwrap();
        let mut full = vec![1.0, 2.0, 0.0, 4.0];
        map.apply_values(&mut full);
        assert_eq!(full[2], 7.0);
        let red = map.gather(&full);
        assert_eq!(red, vec![1.0, 2.0, 4.0]);
        map.scatter_add(&[0.1, 0.2, 0.3], &mut full, 1.0);
        assert_eq!(full, vec![1.1, 2.2, 7.0, 4.3]);
    }

    #[test]
    fn conflicting_constraints_rejected() {
        assert!(DofMap::new(3, &[(0, 1.0), (0, 2.0)]).is_err());
        assert!(DofMap::new(3, &[(0, 1.0), (0, 1.0)]).is_ok());
        assert!(DofMap::new(3, &[(5, 0.0)]).is_err());
    }

    #[test]
    fn violation_measure() {
        let mut f = NodalFields {
            u: vec![],
            alpha: vec![0.5, 0.2],
            alpha_prev: vec![0.4, 0.3],
            history: vec![],
        };
        assert!((f.max_violation() - 0.1).abs() < 1e-15);
        f.alpha[1] = 0.3;
        assert_eq!(f.max_violation(), 0.0);
    }
}
