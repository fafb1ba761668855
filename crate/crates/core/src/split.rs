//! Plane-strain elastic energy density and its tension-compression splits.
//!
//! Symmetric 2x2 tensors are stored componentwise; tangents use the
//! engineering Voigt convention: strain (exx, eyy, 2*exy), stress
//! (sxx, syy, sxy).

use crate::material::{heaviside_neg, macaulay_neg, MaterialSpec, SplitKind};

/// Symmetric 2x2 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Double contraction with itself, tr(e . e).
    pub fn norm_sq(&self) -> f64 {
        self.xx * self.xx + self.yy * self.yy + 2.0 * self.xy * self.xy
    }

    /// 2D deviator: e - (tr e / 2) I.
    pub fn dev(&self) -> Sym2 {
        let m = 0.5 * self.trace();
        Sym2::new(self.xx - m, self.yy - m, self.xy)
    }

    /// Eigenvalues (descending) and the unit eigenvector of the first.
    /// The second eigenvector is the first rotated by 90 degrees.
    pub fn eigen(&self) -> (f64, f64, [f64; 2]) {
        let m = 0.5 * self.trace();
        let d = 0.5 * (self.xx - self.yy);
        let rad = (d * d + self.xy * self.xy).sqrt();
        let e1 = m + rad;
        let e2 = m - rad;
        let n1 = if rad < 1e-300 {
            [1.0, 0.0]
        } else {
            // eigenvector of e1: (xy, e1 - xx) or (e1 - yy, xy), pick the
            // better-conditioned representation
            let v = if d >= 0.0 {
                [d + rad, self.xy]
            } else {
                [self.xy, rad - d]
            };
            let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / len, v[1] / len]
        };
        (e1, e2, n1)
    }
}

/// Energy parts and stresses from a tension-compression split.
#[derive(Debug, Clone, Copy)]
pub struct SplitState {
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub sigma_plus: Sym2,
    pub sigma_minus: Sym2,
}

/// 3x3 Voigt tangent, d sigma = D * d eps with eps = (exx, eyy, 2 exy).
pub type Tangent = [[f64; 3]; 3];

fn macaulay_pos(y: f64) -> f64 {
    y - macaulay_neg(y)
}

fn heaviside_pos(y: f64) -> f64 {
    1.0 - heaviside_neg(y)
}

/// Full (unsplit) strain energy density.
pub fn strain_energy(eps: Sym2, mat: &MaterialSpec) -> f64 {
    0.5 * mat.lambda() * eps.trace() * eps.trace() + mat.mu() * eps.norm_sq()
}

/// Evaluates the selected split: energies and the stress parts.
pub fn strain_energy_split(kind: SplitKind, eps: Sym2, mat: &MaterialSpec) -> SplitState {
    let lambda = mat.lambda();
    let mu = mat.mu();
    match kind {
        SplitKind::NoSplit => {
            let tr = eps.trace();
            let psi = strain_energy(eps, mat);
            let sigma = Sym2::new(
                lambda * tr + 2.0 * mu * eps.xx,
                lambda * tr + 2.0 * mu * eps.yy,
                2.0 * mu * eps.xy,
            );
            SplitState {
                psi_plus: psi,
                psi_minus: 0.0,
                sigma_plus: sigma,
                sigma_minus: Sym2::default(),
            }
        }
        SplitKind::VolDev => {
            let k2 = mat.bulk_modulus_2d();
            let tr = eps.trace();
            let (trp, trm) = (macaulay_pos(tr), macaulay_neg(tr));
            let dev = eps.dev();
            let psi_plus = 0.5 * k2 * trp * trp + mu * dev.norm_sq();
            let psi_minus = 0.5 * k2 * trm * trm;
            let sigma_plus = Sym2::new(
                k2 * trp + 2.0 * mu * dev.xx,
                k2 * trp + 2.0 * mu * dev.yy,
                2.0 * mu * dev.xy,
            );
            let sigma_minus = Sym2::new(k2 * trm, k2 * trm, 0.0);
            SplitState { psi_plus, psi_minus, sigma_plus, sigma_minus }
        }
        SplitKind::Spectral => {
            let tr = eps.trace();
            let (e1, e2, n1) = eps.eigen();
            let n2 = [-n1[1], n1[0]];
            let (trp, trm) = (macaulay_pos(tr), macaulay_neg(tr));
            let (e1p, e1m) = (macaulay_pos(e1), macaulay_neg(e1));
            let (e2p, e2m) = (macaulay_pos(e2), macaulay_neg(e2));
            let psi_plus = 0.5 * lambda * trp * trp + mu * (e1p * e1p + e2p * e2p);
            let psi_minus = 0.5 * lambda * trm * trm + mu * (e1m * e1m + e2m * e2m);
            let proj = |c1: f64, c2: f64| {
                Sym2::new(
                    c1 * n1[0] * n1[0] + c2 * n2[0] * n2[0],
                    c1 * n1[1] * n1[1] + c2 * n2[1] * n2[1],
                    c1 * n1[0] * n1[1] + c2 * n2[0] * n2[1],
                )
            };
            let sp = proj(2.0 * mu * e1p, 2.0 * mu * e2p);
            let sm = proj(2.0 * mu * e1m, 2.0 * mu * e2m);
            let sigma_plus = Sym2::new(sp.xx + lambda * trp, sp.yy + lambda * trp, sp.xy);
            let sigma_minus = Sym2::new(sm.xx + lambda * trm, sm.yy + lambda * trm, sm.xy);
            SplitState { psi_plus, psi_minus, sigma_plus, sigma_minus }
        }
    }
}

/// Consistent tangents (d sigma^+/d eps, d sigma^-/d eps) in Voigt form.
pub fn split_tangents(kind: SplitKind, eps: Sym2, mat: &MaterialSpec) -> (Tangent, Tangent) {
    let lambda = mat.lambda();
    let mu = mat.mu();
    match kind {
        SplitKind::NoSplit => {
            let d = [
                [lambda + 2.0 * mu, lambda, 0.0],
                [lambda, lambda + 2.0 * mu, 0.0],
                [0.0, 0.0, mu],
            ];
            (d, [[0.0; 3]; 3])
        }
        SplitKind::VolDev => {
            let k2 = mat.bulk_modulus_2d();
            let hp = heaviside_pos(eps.trace());
            let hm = heaviside_neg(eps.trace());
            let mut dp = [
                [mu, -mu, 0.0],
                [-mu, mu, 0.0],
                [0.0, 0.0, mu],
            ];
            let mut dm = [[0.0; 3]; 3];
            for i in 0..2 {
                for j in 0..2 {
                    dp[i][j] += hp * k2;
                    dm[i][j] += hm * k2;
                }
            }
            (dp, dm)
        }
        SplitKind::Spectral => {
            let (e1, mut e2, n1) = eps.eigen();
            // limit tangent at coincident eigenvalues
            let tiny = 1e-12 * eps.norm_sq().sqrt().max(1.0);
            if e1 - e2 < tiny {
                e2 = e1 - tiny;
            }
            let n2 = [-n1[1], n1[0]];
            let tr = eps.trace();
            let theta_p = (macaulay_pos(e1) - macaulay_pos(e2)) / (e1 - e2);
            let theta_m = (macaulay_neg(e1) - macaulay_neg(e2)) / (e1 - e2);
            let apply = |delta: Sym2, pos: bool| -> Sym2 {
                let (h_tr, h1, h2, theta) = if pos {
                    (heaviside_pos(tr), heaviside_pos(e1), heaviside_pos(e2), theta_p)
                } else {
                    (heaviside_neg(tr), heaviside_neg(e1), heaviside_neg(e2), theta_m)
                };
                let contract = |a: &[f64; 2], b: &[f64; 2]| {
                    a[0] * delta.xx * b[0]
                        + a[1] * delta.yy * b[1]
                        + delta.xy * (a[0] * b[1] + a[1] * b[0])
                };
                let c1 = contract(&n1, &n1);
                let c2 = contract(&n2, &n2);
                let c12 = contract(&n1, &n2);
                let lam_term = lambda * h_tr * delta.trace();
                Sym2::new(
                    lam_term
                        + 2.0 * mu
                            * (h1 * c1 * n1[0] * n1[0]
                                + h2 * c2 * n2[0] * n2[0]
                                + theta * c12 * 2.0 * n1[0] * n2[0]),
                    lam_term
                        + 2.0 * mu
                            * (h1 * c1 * n1[1] * n1[1]
                                + h2 * c2 * n2[1] * n2[1]
                                + theta * c12 * 2.0 * n1[1] * n2[1]),
                    2.0 * mu
                        * (h1 * c1 * n1[0] * n1[1]
                            + h2 * c2 * n2[0] * n2[1]
                            + theta * c12 * (n1[0] * n2[1] + n1[1] * n2[0])),
                )
            };
            let basis = [
                Sym2::new(1.0, 0.0, 0.0),
                Sym2::new(0.0, 1.0, 0.0),
                Sym2::new(0.0, 0.0, 0.5),
            ];
            let mut dp = [[0.0; 3]; 3];
            let mut dm = [[0.0; 3]; 3];
            for (j, delta) in basis.iter().enumerate() {
                let sp = apply(*delta, true);
                let sm = apply(*delta, false);
                dp[0][j] = sp.xx;
                dp[1][j] = sp.yy;
                dp[2][j] = sp.xy;
                dm[0][j] = sm.xx;
                dm[1][j] = sm.yy;
                dm[2][j] = sm.xy;
            }
            (dp, dm)
        }
    }
}
