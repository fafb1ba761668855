//! Closed-form 1D optimal phase-field profiles and their penalized
//! counterparts, defined on the half-interval [0, L] (mirror symmetry
//! extends them to [-L, L]).
//!
//! Every profile is stored as piecewise (polynomial + sum of decaying
//! exponentials) in the stretched coordinate xi = x / ell, so values and
//! the first two derivatives come from the same representation. All
//! exponential arguments are kept non-positive: naive evaluation of the
//! textbook forms overflows f64 already at moderate penalties.

use crate::error::{Error, Result};
use crate::material::{heaviside_neg, macaulay_neg, ModelKind};

/// amp * exp(rate * xi + off), with rate * xi + off <= 0 on the piece.
#[derive(Debug, Clone, Copy)]
struct ExpTerm {
    amp: f64,
    rate: f64,
    off: f64,
}

/// c0 + c1 xi + c2 xi^2 + sum of exponential terms.
#[derive(Debug, Clone)]
struct PieceExpr {
    poly: [f64; 3],
    exps: Vec<ExpTerm>,
}

impl PieceExpr {
    fn constant(c: f64) -> Self {
        Self { poly: [c, 0.0, 0.0], exps: Vec::new() }
    }

    fn eval(&self, xi: f64) -> f64 {
        let mut v = self.poly[0] + xi * (self.poly[1] + xi * self.poly[2]);
        for t in &self.exps {
            v += t.amp * (t.rate * xi + t.off).exp();
        }
        v
    }

    fn d1(&self, xi: f64) -> f64 {
        let mut v = self.poly[1] + 2.0 * xi * self.poly[2];
        for t in &self.exps {
            v += t.amp * t.rate * (t.rate * xi + t.off).exp();
        }
        v
    }

    fn d2(&self, xi: f64) -> f64 {
        let mut v = 2.0 * self.poly[2];
        for t in &self.exps {
            v += t.amp * t.rate * t.rate * (t.rate * xi + t.off).exp();
        }
        v
    }
}

/// A piecewise 1D profile on [0, L].
#[derive(Debug, Clone)]
pub struct Profile1d {
    ell: f64,
    half_length: f64,
    /// interior breakpoints in xi, strictly increasing
    breaks: Vec<f64>,
    pieces: Vec<PieceExpr>,
}

impl Profile1d {
    fn piece(&self, xi: f64) -> &PieceExpr {
        let mut idx = 0;
        for b in &self.breaks {
            if xi >= *b {
                idx += 1;
            }
        }
        &self.pieces[idx]
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Interior breakpoints in physical coordinates.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.breaks.iter().map(|b| b * self.ell).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece(x / self.ell).eval(x / self.ell)
    }

    /// First derivative with respect to x.
    pub fn deriv(&self, x: f64) -> f64 {
        self.piece(x / self.ell).d1(x / self.ell) / self.ell
    }

    /// Second derivative with respect to x.
    pub fn deriv2(&self, x: f64) -> f64 {
        self.piece(x / self.ell).d2(x / self.ell) / (self.ell * self.ell)
    }

    /// Even extension: alpha(-x) = alpha(x).
    pub fn eval_mirrored(&self, x: f64) -> f64 {
        self.eval(x.abs())
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn check_ratio_at_least_two(ell: f64, half_length: f64) -> Result<()> {
    if half_length < 2.0 * ell {
        return Err(Error::Domain(format!(
            "half-length {half_length} must be at least 2*ell = {}",
            2.0 * ell
        )));
    }
    Ok(())
}

/// Optimal profile of the linear (AT-1) model: (1 - x/2l)^2 then 0,
/// continuously differentiable at x = 2l.
pub fn linear_optimal(ell: f64, half_length: f64) -> Result<Profile1d> {
    check_positive("ell", ell)?;
    check_ratio_at_least_two(ell, half_length)?;
    Ok(Profile1d {
        ell,
        half_length,
        breaks: vec![2.0],
        pieces: vec![
            PieceExpr { poly: [1.0, -1.0, 0.25], exps: Vec::new() },
            PieceExpr::constant(0.0),
        ],
    })
}

/// Optimal profile of the quadratic (AT-2) model: the exact
/// two-exponential solution with alpha(0) = 1 and alpha'(L) = 0.
pub fn quadratic_optimal(ell: f64, half_length: f64) -> Result<Profile1d> {
    check_positive("ell", ell)?;
    check_positive("half_length", half_length)?;
    let ratio = half_length / ell;
    let denom = 1.0 + (-2.0 * ratio).exp();
    Ok(Profile1d {
        ell,
        half_length,
        breaks: Vec::new(),
        pieces: vec![PieceExpr {
            poly: [0.0; 3],
            exps: vec![
                ExpTerm { amp: 1.0 / denom, rate: -1.0, off: 0.0 },
                ExpTerm { amp: 1.0 / denom, rate: 1.0, off: -2.0 * ratio },
            ],
        }],
    })
}

/// Minimizer of the linear model when the constraint alpha >= 0 is
/// dropped: a parabola that dives below zero for L/ell > 2.
pub fn linear_unconstrained(ell: f64, half_length: f64) -> Result<Profile1d> {
    check_positive("ell", ell)?;
    check_positive("half_length", half_length)?;
    let ratio = half_length / ell;
    Ok(Profile1d {
        ell,
        half_length,
        breaks: Vec::new(),
        pieces: vec![PieceExpr { poly: [1.0, -0.5 * ratio, 0.25], exps: Vec::new() }],
    })
}

/// Normalized surface energy of the unconstrained linear minimizer:
/// -(1/16)(L/l)^3 + (3/4)(L/l).
pub fn linear_unconstrained_energy(ratio: f64) -> f64 {
    -ratio * ratio * ratio / 16.0 + 0.75 * ratio
}

/// Gamma-penalized profile of the linear model, assembled as
/// alpha* + delta_alpha_0 + delta_alpha_1 (two Newton corrections).
pub fn gamma_linear(ell: f64, half_length: f64, s: f64) -> Result<Profile1d> {
    check_positive("ell", ell)?;
    check_positive("s", s)?;
    check_ratio_at_least_two(ell, half_length)?;
    let ratio = half_length / ell;
    let q = s.sqrt();
    // denominator exp(-2 q ratio) - 1, close to -1 for large s
    let d0 = (-2.0 * q * ratio).exp() - 1.0;

    let da0 = |exps: &mut Vec<ExpTerm>| {
        exps.push(ExpTerm { amp: 1.0 / (q * d0), rate: -q, off: 0.0 });
        exps.push(ExpTerm { amp: 1.0 / (q * d0), rate: q, off: -2.0 * q * ratio });
    };

    // inner piece x < 2l
    let mut inner = Vec::new();
    da0(&mut inner);
    let a = 1.0 / (4.0 * s * d0);
    for (amp, rate, off) in [
        (a, -q, -2.0 * q),
        (-a, -q, -2.0 * q * (ratio - 1.0)),
        (a, q, -2.0 * q),
        (-a, q, -2.0 * q * (ratio - 1.0)),
    ] {
        inner.push(ExpTerm { amp, rate, off });
    }

    // outer piece x >= 2l
    let mut outer = Vec::new();
    da0(&mut outer);
    for (amp, rate, off) in [
        (a, -q, -2.0 * q),
        (-a, -q, 2.0 * q),
        (a, q, -2.0 * q * ratio - 2.0 * q),
        (-a, q, -2.0 * q * ratio + 2.0 * q),
    ] {
        outer.push(ExpTerm { amp, rate, off });
    }

    Ok(Profile1d {
        ell,
        half_length,
        breaks: vec![2.0],
        pieces: vec![
            PieceExpr { poly: [1.0, -1.0, 0.25], exps: inner },
            PieceExpr { poly: [-0.5 / s, 0.0, 0.0], exps: outer },
        ],
    })
}

/// Gamma-penalized profile of the quadratic model, assembled as
/// alpha* + delta_alpha_0 (a single Newton correction).
pub fn gamma_quadratic(ell: f64, half_length: f64, s: f64) -> Result<Profile1d> {
    check_positive("ell", ell)?;
    check_positive("s", s)?;
    check_ratio_at_least_two(ell, half_length)?;
    let ratio = half_length / ell;
    let p = (s + 1.0).sqrt();
    let d0 = (-2.0 * p * ratio).exp() - 1.0;
    let amp = ratio.tanh() / (p * d0);

    let base = quadratic_optimal(ell, half_length)?;
    let mut exps = base.pieces[0].exps.clone();
    exps.push(ExpTerm { amp, rate: -p, off: 0.0 });
    exps.push(ExpTerm { amp, rate: p, off: -2.0 * p * ratio });

    Ok(Profile1d {
        ell,
        half_length,
        breaks: Vec::new(),
        pieces: vec![PieceExpr { poly: [0.0; 3], exps }],
    })
}

/// Interface point of the rho-penalized profile: where the parabola hands
/// over to the exponential tail. Tends to 2l as r grows.
pub fn xhat_star(r: f64, ell: f64) -> f64 {
    ell * (-1.0 / r.sqrt() + (1.0 / r + 4.0).sqrt())
}

/// Linear coefficient of the parabolic part of the rho profile.
pub fn coeff_r(r: f64, ell: f64) -> f64 {
    -0.5 / ell * (1.0 / r + 4.0).sqrt()
}

/// Amplitude of the exponential tail of the rho profile. Overflows f64
/// for very large r; the profile evaluator never forms it in isolation.
pub fn coeff_t(r: f64) -> f64 {
    0.5 / r * (-1.0 + (1.0 + 4.0 * r).sqrt()).exp()
}

/// Rho-penalized recovery profile of the linear model: parabola on
/// (0, xhat*), exponential tail with a small negative offset beyond.
pub fn rho_profile(ell: f64, half_length: f64, r: f64) -> Result<Profile1d> {
    check_positive("ell", ell)?;
    check_positive("r", r)?;
    let xh = xhat_star(r, ell);
    if half_length <= xh {
        return Err(Error::Domain(format!(
            "half-length {half_length} must exceed the interface point {xh}"
        )));
    }
    let rq = r.sqrt();
    // T * exp(-sqrt(r) x / l) with T folded into the exponent offset so the
    // argument stays <= 0 on the tail
    let tail = ExpTerm {
        amp: 0.5 / r,
        rate: -rq,
        off: -1.0 + (1.0 + 4.0 * r).sqrt(),
    };
    Ok(Profile1d {
        ell,
        half_length,
        breaks: vec![xh / ell],
        pieces: vec![
            PieceExpr { poly: [1.0, coeff_r(r, ell) * ell, 0.25], exps: Vec::new() },
            PieceExpr { poly: [-0.5 / r, 0.0, 0.0], exps: vec![tail] },
        ],
    })
}

/// One step of the fixed-point recursion for the interface point.
pub fn rho_recursion_step(xhat: f64, r: f64, ell: f64) -> f64 {
    let rq = r.sqrt();
    let num = 1.0 + 2.0 * r - r / (2.0 * ell * ell) * xhat * xhat;
    let den = 1.0 + rq / ell * xhat;
    ell / rq * (num / den).ln() + xhat
}

/// Recursion seed: the zero of the unconstrained parabola.
pub fn rho_recursion_seed(ell: f64, half_length: f64) -> f64 {
    half_length - (half_length * half_length - 4.0 * ell * ell).sqrt()
}

/// Which penalized boundary value problem the finite-difference oracle
/// discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    GammaLinear,
    GammaQuadratic,
    Rho,
}

/// Independent verification oracle: semismooth Newton on the central
/// difference discretization of the penalized boundary value problems.
/// `grid_per_ell` nodes per unit length scale (at least 100); one-sided
/// second-order stencils at the Neumann ends.
///
/// Returns the sampled (x, alpha) pairs. This path shares no code with
/// the closed-form evaluators above.
pub fn fd_oracle_solve(
    kind: OracleKind,
    ell: f64,
    half_length: f64,
    penalty: f64,
    grid_per_ell: usize,
) -> Result<Vec<(f64, f64)>> {
    check_positive("ell", ell)?;
    check_positive("penalty", penalty)?;
    if grid_per_ell < 100 {
        return Err(Error::Domain(format!(
            "oracle grid must have at least 100 nodes per ell, got {grid_per_ell}"
        )));
    }
    let ratio = half_length / ell;
    let n = (ratio * grid_per_ell as f64).round() as usize + 1;
    let h = ratio / (n - 1) as f64;

    // reference profile entering the gamma bracket
    let reference: Vec<f64> = match kind {
        OracleKind::GammaLinear => {
            let p = linear_optimal(ell, half_length)?;
            (0..n).map(|i| p.eval(i as f64 * h * ell)).collect()
        }
        OracleKind::GammaQuadratic => {
            let p = quadratic_optimal(ell, half_length)?;
            (0..n).map(|i| p.eval(i as f64 * h * ell)).collect()
        }
        OracleKind::Rho => vec![0.0; n],
    };
    let model = match kind {
        OracleKind::GammaQuadratic => ModelKind::At2,
        _ => ModelKind::At1,
    };
    let dirichlet_left = kind == OracleKind::Rho;

    // initial guess: the unpenalized optimal profile (rho: its linear one)
    let mut alpha: Vec<f64> = match kind {
        OracleKind::Rho => {
            let p = linear_optimal(ell, half_length)?;
            (0..n).map(|i| p.eval(i as f64 * h * ell)).collect()
        }
        _ => reference.clone(),
    };

    let residual = |alpha: &[f64], out: &mut Vec<f64>| {
        out.clear();
        if dirichlet_left {
            out.push(alpha[0] - 1.0);
        } else {
            out.push((-3.0 * alpha[0] + 4.0 * alpha[1] - alpha[2]) / (2.0 * h));
        }
        for i in 1..n - 1 {
            let lap = (alpha[i - 1] - 2.0 * alpha[i] + alpha[i + 1]) / (h * h);
            let bracket = match kind {
                OracleKind::Rho => macaulay_neg(alpha[i]),
                _ => macaulay_neg(alpha[i] - reference[i]),
            };
            out.push(-lap + 0.5 * model.dissipation_prime(alpha[i]) + penalty * bracket);
        }
        out.push((3.0 * alpha[n - 1] - 4.0 * alpha[n - 2] + alpha[n - 3]) / (2.0 * h));
    };

    let mut res = Vec::with_capacity(n);
    let mut band = BandMatrix::new(n, 2, 2);
    let mut last_norm = f64::INFINITY;
    for _ in 0..200 {
        residual(&alpha, &mut res);
        let norm = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // the rounding floor of the 1/h^2 stencil scales with eps / h^2;
        // accept a stalled iteration once far below truncation error
        let floor = (10.0 * f64::EPSILON / (h * h)).max(1e-11);
        let stalled = norm < 100.0 * floor && norm > 0.5 * last_norm;
        if norm <= floor || stalled {
            return Ok((0..n).map(|i| (i as f64 * h * ell, alpha[i])).collect());
        }
        last_norm = norm;
        band.clear();
        if dirichlet_left {
            band.set(0, 0, 1.0);
        } else {
            band.set(0, 0, -3.0 / (2.0 * h));
            band.set(0, 1, 4.0 / (2.0 * h));
            band.set(0, 2, -1.0 / (2.0 * h));
        }
        for i in 1..n - 1 {
            let active = match kind {
                OracleKind::Rho => heaviside_neg(alpha[i]),
                _ => heaviside_neg(alpha[i] - reference[i]),
            };
            band.set(i, i - 1, -1.0 / (h * h));
            band.set(
                i,
                i,
                2.0 / (h * h) + 0.5 * model.dissipation_prime2(alpha[i]) + penalty * active,
            );
            band.set(i, i + 1, -1.0 / (h * h));
        }
        band.set(n - 1, n - 3, 1.0 / (2.0 * h));
        band.set(n - 1, n - 2, -4.0 / (2.0 * h));
        band.set(n - 1, n - 1, 3.0 / (2.0 * h));
        let delta = band.solve(&res).map_err(|msg| Error::LinearSolver {
            msg: msg.to_string(),
            iters: 0,
            residual: last_norm,
        })?;
        for i in 0..n {
            alpha[i] -= delta[i];
        }
    }
    Err(Error::NewtonDiverged { iters: 200, residual: last_norm })
}

/// Normalized surface energy (2 / c_w) int_0^L (w(alpha) / l + l alpha'^2) dx
/// of a profile, by adaptive Simpson quadrature split at the breakpoints
/// so every panel sees a smooth integrand.
pub fn normalized_surface_energy(p: &Profile1d, model: ModelKind) -> f64 {
    let ell = p.ell();
    let f = |x: f64| {
        let d = p.deriv(x);
        2.0 / model.c_w() * (model.dissipation(p.eval(x)) / ell + ell * d * d)
    };
    let mut edges = vec![0.0];
    for b in p.breakpoints() {
        if b > 0.0 && b < p.half_length() {
            edges.push(b);
        }
    }
    edges.push(p.half_length());
    edges
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-13))
        .sum()
}

/// Normalized gamma-penalized energy: the surface part plus
/// (gamma / G_c) int <alpha - alpha_ref>_^2 dx with gamma expressed
/// through the dimensionless penalty s.
pub fn normalized_penalized_energy_gamma(
    p: &Profile1d,
    reference: &Profile1d,
    model: ModelKind,
    s: f64,
) -> f64 {
    let ell = p.ell();
    let f = |x: f64| {
        let d = macaulay_neg(p.eval(x) - reference.eval(x));
        2.0 / model.c_w() * s / ell * d * d
    };
    normalized_surface_energy(p, model) + integrate_piecewise(p, reference, &f)
}

/// Normalized rho-penalized energy: the surface part plus
/// (rho / G_c) int <alpha>_^2 dx with rho expressed through r.
pub fn normalized_penalized_energy_rho(p: &Profile1d, r: f64) -> f64 {
    let ell = p.ell();
    let f = |x: f64| {
        let d = macaulay_neg(p.eval(x));
        0.75 * r / ell * d * d
    };
    normalized_surface_energy(p, ModelKind::At1) + integrate_piecewise(p, p, &f)
}

fn integrate_piecewise<F: Fn(f64) -> f64>(a: &Profile1d, b: &Profile1d, f: &F) -> f64 {
    let mut edges = vec![0.0];
    for brk in a.breakpoints().into_iter().chain(b.breakpoints()) {
        if brk > 0.0 && brk < a.half_length() {
            edges.push(brk);
        }
    }
    edges.push(a.half_length());
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();
    edges
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], 1e-13))
        .sum()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Richardson-extrapolated oracle: runs `fd_oracle_solve` on a ladder of
/// refined grids and eliminates the leading error terms at the nodes of
/// the requested grid. The base refinement grows with sqrt(penalty) so
/// the boundary layer of width ell / sqrt(penalty) stays resolved.
pub fn fd_oracle_refined(
    kind: OracleKind,
    ell: f64,
    half_length: f64,
    penalty: f64,
    grid_per_ell: usize,
) -> Result<Vec<(f64, f64)>> {
    check_positive("penalty", penalty)?;
    let mut base = grid_per_ell.max(100);
    let layer_resolved = (8.0 * penalty.sqrt()).ceil() as usize;
    while base < layer_resolved {
        base *= 2;
    }
    let coarse = fd_oracle_solve(kind, ell, half_length, penalty, base)?;
    let mid = fd_oracle_solve(kind, ell, half_length, penalty, 2 * base)?;
    let fine = fd_oracle_solve(kind, ell, half_length, penalty, 4 * base)?;
    let out_stride = (base / grid_per_ell.max(100)).max(1);
    let mut out = Vec::new();
    let mut i = 0;
    while i < coarse.len() {
        let (x, a1) = coarse[i];
        let a2 = mid[2 * i].1;
        let a4 = fine[4 * i].1;
        let r12 = (4.0 * a2 - a1) / 3.0;
        let r24 = (4.0 * a4 - a2) / 3.0;
        out.push((x, (16.0 * r24 - r12) / 15.0));
        i += out_stride;
    }
    Ok(out)
}

/// Banded matrix with `kl` sub- and `ku` super-diagonals; LU without
/// pivoting (the discretizations above keep the pivots away from zero).
struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    fn clear(&mut self) {
        self.data.fill(0.0);
    }

    fn idx(&self, row: usize, col: usize) -> usize {
        row * (self.kl + self.ku + 1) + (col + self.kl - row)
    }

    fn set(&mut self, row: usize, col: usize, v: f64) {
        let i = self.idx(row, col);
        self.data[i] = v;
    }

    fn get(&self, row: usize, col: usize) -> f64 {
        self.data[self.idx(row, col)]
    }

    fn solve(&mut self, rhs: &[f64]) -> std::result::Result<Vec<f64>, &'static str> {
        let n = self.n;
        let mut x = rhs.to_vec();
        // forward elimination
        for k in 0..n - 1 {
            let pivot = self.get(k, k);
            if pivot.abs() < 1e-300 {
                return Err("zero pivot in banded solve");
            }
            let row_end = (k + self.kl).min(n - 1);
            for i in k + 1..=row_end {
                let factor = self.get(i, k) / pivot;
                if factor != 0.0 {
                    let col_end = (k + self.ku).min(n - 1);
                    for j in k..=col_end {
                        let v = self.get(i, j) - factor * self.get(k, j);
                        self.set(i, j, v);
                    }
                    x[i] -= factor * x[k];
                }
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let col_end = (k + self.ku).min(n - 1);
            let mut sum = x[k];
            for j in k + 1..=col_end {
                sum -= self.get(k, j) * x[j];
            }
            x[k] = sum / self.get(k, k);
        }
        Ok(x)
    }
}

/// Writes sampled profile values as `x, alpha` CSV with one header line.
pub fn write_profile_csv(path: &std::path::Path, samples: &[(f64, f64)]) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "x, alpha")?;
    for (x, a) in samples {
        writeln!(f, "{x:.17e}, {a:.17e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_optimal_values() {
        let p = linear_optimal(1.0, 4.0).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(2.0), 0.0);
        assert_eq!(p.eval(3.5), 0.0);
        assert!((p.eval(1.0) - 0.25).abs() < 1e-15);
        assert!(linear_optimal(1.0, 1.9).is_err());
    }

    #[test]
    fn quadratic_optimal_values() {
        let p = quadratic_optimal(1.0, 40.0).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert!((p.eval(1.0) - (-1.0f64).exp()).abs() <= 1e-16);
        assert!(p.deriv(40.0).abs() < 1e-18);
        // finite-difference confirmation of the Neumann end
        let h = 1e-6;
        let fd = (p.eval(40.0) - p.eval(40.0 - h)) / h;
        assert!(fd.abs() < 1e-9);
    }

    #[test]
    fn unconstrained_energy_landmarks() {
        assert!((linear_unconstrained_energy(2.0) - 1.0).abs() < 1e-12);
        assert!(linear_unconstrained_energy(2.0 * 3.0f64.sqrt()).abs() < 1e-12);
        let p = linear_unconstrained(1.0, 4.0).unwrap();
        assert!((p.eval(4.0) - (-3.0)).abs() < 1e-12);
    }

    #[test]
    fn gamma_linear_limits() {
        let base = linear_optimal(1.0, 4.0).unwrap();
        let p = gamma_linear(1.0, 4.0, 1e12).unwrap();
        for i in 0..=40 {
            let x = i as f64 * 0.1;
            assert!((p.eval(x) - base.eval(x)).abs() < 2e-6);
        }
        // leading deviation at x = 0 is -1/sqrt(s)
        let s = 1e8;
        let p = gamma_linear(1.0, 4.0, s).unwrap();
        let ratio = (p.eval(0.0) - 1.0) * s.sqrt();
        assert!((ratio + 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn gamma_quadratic_limits() {
        let base = quadratic_optimal(1.0, 4.0).unwrap();
        let p = gamma_quadratic(1.0, 4.0, 1e12).unwrap();
        for i in 0..=40 {
            let x = i as f64 * 0.1;
            assert!((p.eval(x) - base.eval(x)).abs() < 2e-6);
        }
        let s = 1e8;
        let p = gamma_quadratic(1.0, 4.0, s).unwrap();
        let dev = p.eval(0.0) - quadratic_optimal(1.0, 4.0).unwrap().eval(0.0);
        let lead = -1.0 / (s + 1.0f64).sqrt();
        assert!((dev / lead - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gamma_profiles_survive_extreme_penalty_and_length() {
        // exp(2 sqrt(s) L / ell) would overflow by hundreds of orders
        for p in [
            gamma_linear(1.0, 400.0, 1e6).unwrap(),
            gamma_quadratic(1.0, 400.0, 1e6).unwrap(),
        ] {
            for x in [0.0, 1.0, 200.0, 400.0] {
                assert!(p.eval(x).is_finite());
                assert!(p.deriv2(x).is_finite());
            }
        }
    }

    #[test]
    fn rho_profile_interface() {
        let r = 4.0;
        let xh = xhat_star(r, 1.0);
        assert!((xh - 1.5616).abs() < 1e-3);
        let p = rho_profile(1.0, 4.0, r).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert!(p.eval(xh).abs() < 1e-12);
        // continuity of value and slope at the interface
        let below = p.eval(xh - 1e-9);
        let above = p.eval(xh + 1e-9);
        assert!((below - above).abs() < 1e-8);
        assert!((p.deriv(xh - 1e-9) - p.deriv(xh + 1e-9)).abs() < 1e-7);
        // bounded constraint violation in the tail
        let tail = p.eval(4.0);
        assert!(tail < 0.0);
        assert!(tail >= -0.5 / r - 1e-12);
        // interface approaches 2l for stiff penalties
        assert!((xhat_star(1e12, 1.0) - 2.0).abs() < 1e-5);
        assert!(rho_profile(1.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn rho_recursion_behaviour() {
        for r in [4.0, 40.0] {
            let xs = xhat_star(r, 1.0);
            // fixed point
            assert!((rho_recursion_step(xs, r, 1.0) - xs).abs() < 1e-12);
            // monotone increase from the seed, geometric error decay
            let mut x = rho_recursion_seed(1.0, 4.0);
            let mut prev_err = (x - xs).abs();
            for _ in 0..50 {
                let next = rho_recursion_step(x, r, 1.0);
                assert!(next >= x - 1e-14);
                let err = (next - xs).abs();
                if prev_err > 1e-13 {
                    assert!(err <= prev_err);
                }
                prev_err = err;
                x = next;
            }
            assert!((x - xs).abs() < 1e-10);
        }
    }

    fn ode_residual_gamma(p: &Profile1d, model: ModelKind, s: f64, reference: &Profile1d, x: f64) -> f64 {
        let ell = p.ell();
        -ell * ell * p.deriv2(x) + 0.5 * model.dissipation_prime(p.eval(x))
            + s * macaulay_neg(p.eval(x) - reference.eval(x))
    }

    #[test]
    fn strong_form_residual_vanishes() {
        let (ell, half) = (1.0, 4.0);
        for s in [100.0, 1e4] {
            let p = gamma_linear(ell, half, s).unwrap();
            let base = linear_optimal(ell, half).unwrap();
            let q = gamma_quadratic(ell, half, s).unwrap();
            let qbase = quadratic_optimal(ell, half).unwrap();
            for i in 0..1000 {
                let x = (i as f64 + 0.5) / 1000.0 * half;
                if (x - 2.0 * ell).abs() < 1e-2 {
                    continue;
                }
                let r1 = ode_residual_gamma(&p, ModelKind::At1, s, &base, x);
                assert!(r1.abs() <= 1e-8 / (ell * ell), "lin s={s} x={x}: {r1:.3e}");
                let r2 = ode_residual_gamma(&q, ModelKind::At2, s, &qbase, x);
                assert!(r2.abs() <= 1e-8 / (ell * ell), "quad s={s} x={x}: {r2:.3e}");
            }
        }
        // rho bvp: -l^2 a'' + 1/2 + r <a>_ = 0
        for r in [4.0, 400.0] {
            let p = rho_profile(ell, half, r).unwrap();
            let xh = xhat_star(r, ell);
            for i in 0..1000 {
                let x = (i as f64 + 0.5) / 1000.0 * half;
                if (x - xh).abs() < 1e-2 {
                    continue;
                }
                let res = -ell * ell * p.deriv2(x) + 0.5 + r * macaulay_neg(p.eval(x));
                assert!(res.abs() <= 1e-8 / (ell * ell), "rho r={r} x={x}: {res:.3e}");
            }
        }
    }

    #[test]
    fn pointwise_monotone_convergence_in_penalty() {
        let base = linear_optimal(1.0, 4.0).unwrap();
        let qbase = quadratic_optimal(1.0, 4.0).unwrap();
        let penalties = [100.0, 1000.0, 1e4, 1e5];
        for w in penalties.windows(2) {
            let (s1, s2) = (w[0], w[1]);
            let l1 = gamma_linear(1.0, 4.0, s1).unwrap();
            let l2 = gamma_linear(1.0, 4.0, s2).unwrap();
            let q1 = gamma_quadratic(1.0, 4.0, s1).unwrap();
            let q2 = gamma_quadratic(1.0, 4.0, s2).unwrap();
            for i in 0..=80 {
                let x = i as f64 / 80.0 * 4.0;
                assert!(
                    (l2.eval(x) - base.eval(x)).abs() <= (l1.eval(x) - base.eval(x)).abs() + 1e-14
                );
                assert!(
                    (q2.eval(x) - qbase.eval(x)).abs() <= (q1.eval(x) - qbase.eval(x)).abs() + 1e-14
                );
            }
        }
    }

    #[test]
    fn length_ratio_insensitivity() {
        for s in [100.0, 1e4] {
            let short = gamma_linear(1.0, 4.0, s).unwrap();
            let long = gamma_linear(1.0, 400.0, s).unwrap();
            let mut sup = 0.0f64;
            for i in 0..=400 {
                let x = i as f64 / 100.0;
                sup = sup.max((short.eval(x) - long.eval(x)).abs());
            }
            assert!(sup <= 1e-3, "s={s}: sup deviation {sup:.3e}");
        }
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let sup_diff = |closed: &Profile1d, oracle: &[(f64, f64)]| {
            oracle
                .iter()
                .fold(0.0f64, |m, (x, a)| m.max((closed.eval(*x) - a).abs()))
        };
        for s in [100.0, 1e4] {
            let o = fd_oracle_refined(OracleKind::GammaLinear, 1.0, 4.0, s, 100).unwrap();
            let p = gamma_linear(1.0, 4.0, s).unwrap();
            assert!(sup_diff(&p, &o) <= 1e-6, "gamma linear s={s}");
            let o = fd_oracle_refined(OracleKind::GammaQuadratic, 1.0, 4.0, s, 100).unwrap();
            let p = gamma_quadratic(1.0, 4.0, s).unwrap();
            assert!(sup_diff(&p, &o) <= 1e-6, "gamma quadratic s={s}");
            let o = fd_oracle_refined(OracleKind::Rho, 1.0, 4.0, s, 100).unwrap();
            let p = rho_profile(1.0, 4.0, s).unwrap();
            assert!(sup_diff(&p, &o) <= 1e-6, "rho r={s}");
        }
        // the closed-form rho profile is the long-domain solution: small
        // penalties need sqrt(r) L / ell large for the tail to decay
        let o = fd_oracle_refined(OracleKind::Rho, 1.0, 20.0, 4.0, 100).unwrap();
        let p = rho_profile(1.0, 20.0, 4.0).unwrap();
        assert!(sup_diff(&p, &o) <= 1e-6, "rho r=4");
    }

    #[test]
    fn oracle_converges_second_order() {
        let p = gamma_linear(1.0, 4.0, 100.0).unwrap();
        let sup = |grid: usize| {
            fd_oracle_solve(OracleKind::GammaLinear, 1.0, 4.0, 100.0, grid)
                .unwrap()
                .iter()
                .fold(0.0f64, |m, (x, a)| m.max((p.eval(*x) - a).abs()))
        };
        let (e1, e2, e4) = (sup(100), sup(200), sup(400));
        assert!(e2 < e1 / 3.0 && e4 < e2 / 3.0, "{e1:.2e} {e2:.2e} {e4:.2e}");
    }

    #[test]
    fn oracle_guards() {
        assert!(fd_oracle_solve(OracleKind::GammaLinear, 1.0, 4.0, 0.0, 100).is_err());
        assert!(fd_oracle_solve(OracleKind::GammaLinear, 1.0, 4.0, 10.0, 50).is_err());
    }

    #[test]
    fn surface_energy_landmarks() {
        let p = linear_optimal(1.0, 4.0).unwrap();
        let e = normalized_surface_energy(&p, ModelKind::At1);
        assert!((e - 1.0).abs() < 1e-12, "{e}");
        for ratio in [2.0f64, 4.0, 40.0] {
            let p = quadratic_optimal(1.0, ratio).unwrap();
            let e = normalized_surface_energy(&p, ModelKind::At2);
            assert!((e - ratio.tanh()).abs() < 1e-11, "ratio {ratio}: {e}");
        }
    }

    #[test]
    fn mirror_symmetry() {
        let p = linear_optimal(1.0, 4.0).unwrap();
        assert_eq!(p.eval_mirrored(-1.0), p.eval(1.0));
    }
}
