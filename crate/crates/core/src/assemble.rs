//! P1 assembly for the coupled displacement / phase-field problem.
//!
//! Everything derives from a single discrete energy: the elastic,
//! gradient and pressure terms use the one-point centroid rule (exact
//! for the polynomial orders involved), while the dissipation and
//! penalty terms use the three-point edge-midpoint rule. Residuals and
//! tangents are the exact first and second derivatives of that energy,
//! so finite-difference consistency holds to rounding.

use crate::dof::{DofMap, NodalFields};
use crate::error::{Error, Result};
use crate::material::{
    degradation, degradation_prime, degradation_prime2, heaviside_neg, macaulay_neg,
    IrreversibilityMode, MaterialSpec, ModelKind, SplitKind,
};
use crate::mesh::{BoundaryLabel, Mesh2D};
use crate::sparse::{CsrMatrix, Triplets};
use crate::split::{split_tangents, strain_energy_split, Sym2};

/// Everything the assemblers need to know about the physics of a run.
#[derive(Debug, Clone)]
pub struct PhysicsConfig {
    pub material: MaterialSpec,
    pub model: ModelKind,
    pub split: SplitKind,
    pub irreversibility: IrreversibilityMode,
    /// Constant fluid pressure in the crack (pressurized-fracture mode).
    pub pressure: Option<f64>,
    /// Extra rho-penalty enforcing alpha >= 0; required by the linear
    /// model in history-field mode, unused otherwise.
    pub recovery_rho: Option<f64>,
    /// Relative residual stiffness keeping fully-broken elements
    /// invertible; folded into the degradation consistently.
    pub residual_stiffness: f64,
}

impl PhysicsConfig {
    pub fn new(
        material: MaterialSpec,
        model: ModelKind,
        split: SplitKind,
        irreversibility: IrreversibilityMode,
    ) -> Self {
        Self {
            material,
            model,
            split,
            irreversibility,
            pressure: None,
            recovery_rho: None,
            residual_stiffness: 1e-8,
        }
    }

    fn g(&self, alpha: f64) -> f64 {
        (1.0 - self.residual_stiffness) * degradation(alpha) + self.residual_stiffness
    }

    fn g_prime(&self, alpha: f64) -> f64 {
        (1.0 - self.residual_stiffness) * degradation_prime(alpha)
    }

    fn g_prime2(&self, alpha: f64) -> f64 {
        (1.0 - self.residual_stiffness) * degradation_prime2(alpha)
    }
}

/// Energy bookkeeping of one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub surface: f64,
    pub penalty: f64,
    pub pressure: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.elastic + self.surface + self.penalty + self.pressure
    }
}

fn element_strain(mesh: &Mesh2D, t: usize, u: &[f64]) -> Sym2 {
    let (grads, _) = mesh.shape_gradients(t);
    let tri = mesh.triangles[t];
    let mut e = Sym2 { xx: 0.0, yy: 0.0, xy: 0.0 };
    for a in 0..3 {
        let ux = u[2 * tri[a]];
        let uy = u[2 * tri[a] + 1];
        e.xx += grads[a][0] * ux;
        e.yy += grads[a][1] * uy;
        e.xy += 0.5 * (grads[a][1] * ux + grads[a][0] * uy);
    }
    e
}

fn element_grad_alpha(mesh: &Mesh2D, t: usize, alpha: &[f64]) -> [f64; 2] {
    let (grads, _) = mesh.shape_gradients(t);
    let tri = mesh.triangles[t];
    let mut g = [0.0, 0.0];
    for a in 0..3 {
        g[0] += grads[a][0] * alpha[tri[a]];
        g[1] += grads[a][1] * alpha[tri[a]];
    }
    g
}

fn centroid_value(mesh: &Mesh2D, t: usize, field: &[f64]) -> f64 {
    let tri = mesh.triangles[t];
    (field[tri[0]] + field[tri[1]] + field[tri[2]]) / 3.0
}

/// Edge midpoints of the local nodes (0,1), (1,2), (2,0).
const MIDPOINT_NODES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

fn midpoint_values(mesh: &Mesh2D, t: usize, field: &[f64]) -> [f64; 3] {
    let tri = mesh.triangles[t];
    let v = [field[tri[0]], field[tri[1]], field[tri[2]]];
    [
        0.5 * (v[0] + v[1]),
        0.5 * (v[1] + v[2]),
        0.5 * (v[2] + v[0]),
    ]
}

/// Discrete total energy of the state, split into its parts. In
/// history-field mode the elastic driving of the phase equation is not
/// variational, so `elastic` always reports the true strain energy.
pub fn discrete_energy(mesh: &Mesh2D, cfg: &PhysicsConfig, fields: &NodalFields) -> EnergyBreakdown {
    let mat = &cfg.material;
    let gc_cw = mat.toughness / cfg.model.c_w();
    let ell = mat.length_scale;
    let mut out = EnergyBreakdown::default();
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let eps = element_strain(mesh, t, &fields.u);
        let ac = centroid_value(mesh, t, &fields.alpha);
        let s = strain_energy_split(cfg.split, eps, mat);
        out.elastic += area * (cfg.g(ac) * s.psi_plus + s.psi_minus);

        let ga = element_grad_alpha(mesh, t, &fields.alpha);
        out.surface += gc_cw * ell * area * (ga[0] * ga[0] + ga[1] * ga[1]);
        let am = midpoint_values(mesh, t, &fields.alpha);
        for m in 0..3 {
            out.surface += gc_cw / ell * area / 3.0 * cfg.model.dissipation(am[m]);
        }

        if let IrreversibilityMode::PenaltyGamma(gamma) = cfg.irreversibility {
            let pm = midpoint_values(mesh, t, &fields.alpha_prev);
            for m in 0..3 {
                let v = macaulay_neg(am[m] - pm[m]);
                out.penalty += 0.5 * gamma * area / 3.0 * v * v;
            }
        }
        if let Some(rho) = cfg.recovery_rho {
            for m in 0..3 {
                let v = macaulay_neg(am[m]);
                out.penalty += 0.5 * rho * area / 3.0 * v * v;
            }
        }

        if let Some(p) = cfg.pressure {
            let tri = mesh.triangles[t];
            let mut uc = [0.0, 0.0];
            for a in 0..3 {
                uc[0] += fields.u[2 * tri[a]] / 3.0;
                uc[1] += fields.u[2 * tri[a] + 1] / 3.0;
            }
            out.pressure += p * area * (uc[0] * ga[0] + uc[1] * ga[1]);
        }
    }
    out
}

/// The functional whose alpha-gradient is the phase-field residual;
/// serves as the line-search merit of the phase Newton solve. In
/// history-field mode the driving g(alpha) H replaces the tensile
/// energy, which makes the subproblem variational again.
pub fn phase_merit(mesh: &Mesh2D, cfg: &PhysicsConfig, fields: &NodalFields) -> f64 {
    match cfg.irreversibility {
        IrreversibilityMode::PenaltyGamma(_) => discrete_energy(mesh, cfg, fields).total(),
        IrreversibilityMode::HistoryField => {
            let mat = &cfg.material;
            let gc_cw = mat.toughness / cfg.model.c_w();
            let ell = mat.length_scale;
            let mut e = 0.0;
            for t in 0..mesh.n_triangles() {
                let area = mesh.area(t);
                let ac = centroid_value(mesh, t, &fields.alpha);
                e += area * cfg.g(ac) * fields.history[t];
                let ga = element_grad_alpha(mesh, t, &fields.alpha);
                e += gc_cw * ell * area * (ga[0] * ga[0] + ga[1] * ga[1]);
                let am = midpoint_values(mesh, t, &fields.alpha);
                for m in 0..3 {
                    e += gc_cw / ell * area / 3.0 * cfg.model.dissipation(am[m]);
                }
                if let Some(rho) = cfg.recovery_rho {
                    for m in 0..3 {
                        let v = macaulay_neg(am[m]);
                        e += 0.5 * rho * area / 3.0 * v * v;
                    }
                }
                if let Some(p) = cfg.pressure {
                    let tri = mesh.triangles[t];
                    let mut uc = [0.0, 0.0];
                    for a in 0..3 {
                        uc[0] += fields.u[2 * tri[a]] / 3.0;
                        uc[1] += fields.u[2 * tri[a] + 1] / 3.0;
                    }
                    e += p * area * (uc[0] * ga[0] + uc[1] * ga[1]);
                }
            }
            e
        }
    }
}

/// Residual and tangent of the displacement equation on the free dofs.
pub fn assemble_displacement(
    mesh: &Mesh2D,
    cfg: &PhysicsConfig,
    fields: &NodalFields,
    dofs: &DofMap,
) -> Result<(Vec<f64>, CsrMatrix)> {
    let full = displacement_residual_full(mesh, cfg, fields)?;
    let mut res = vec![0.0; dofs.n_free()];
    for dof in 0..dofs.n_total() {
        if let Some(i) = dofs.free(dof) {
            res[i] = full[dof];
        }
    }
    let mut trip = Triplets::new(dofs.n_free());
    for t in 0..mesh.n_triangles() {
        let (grads, area) = mesh.shape_gradients(t);
        if !(area > 0.0) {
            return Err(Error::Assembly(format!("triangle {t} has area {area}")));
        }
        let tri = mesh.triangles[t];
        let eps = element_strain(mesh, t, &fields.u);
        let ac = centroid_value(mesh, t, &fields.alpha);
        let (cp, cm) = split_tangents(cfg.split, eps, &cfg.material);
        let gd = cfg.g(ac);
        // effective tangent g*C+ + C-
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = gd * cp[i][j] + cm[i][j];
            }
        }
        // B matrix rows: (e_xx, e_yy, gamma_xy) per (node, direction)
        let mut b = [[0.0; 6]; 3];
        for a in 0..3 {
            b[0][2 * a] = grads[a][0];
            b[1][2 * a + 1] = grads[a][1];
            b[2][2 * a] = grads[a][1];
            b[2][2 * a + 1] = grads[a][0];
        }
        for p in 0..6 {
            let row_dof = 2 * tri[p / 2] + p % 2;
            let Some(ri) = dofs.free(row_dof) else { continue };
            for q in 0..6 {
                let col_dof = 2 * tri[q / 2] + q % 2;
                let Some(ci) = dofs.free(col_dof) else { continue };
                let mut k = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        k += b[i][p] * c[i][j] * b[j][q];
                    }
                }
                trip.push(ri, ci, area * k);
            }
        }
    }
    Ok((res, trip.into_csr()))
}

/// Displacement residual on all dofs, Dirichlet rows included; the
/// constrained entries carry the reaction forces.
pub fn displacement_residual_full(
    mesh: &Mesh2D,
    cfg: &PhysicsConfig,
    fields: &NodalFields,
) -> Result<Vec<f64>> {
    let mut res = vec![0.0; 2 * mesh.nodes.len()];
    for t in 0..mesh.n_triangles() {
        let (grads, area) = mesh.shape_gradients(t);
        if !(area > 0.0) {
            return Err(Error::Assembly(format!("triangle {t} has area {area}")));
        }
        let tri = mesh.triangles[t];
        let eps = element_strain(mesh, t, &fields.u);
        let ac = centroid_value(mesh, t, &fields.alpha);
        let s = strain_energy_split(cfg.split, eps, &cfg.material);
        let gd = cfg.g(ac);
        let sig = [
            gd * s.sigma_plus.xx + s.sigma_minus.xx,
            gd * s.sigma_plus.yy + s.sigma_minus.yy,
            gd * s.sigma_plus.xy + s.sigma_minus.xy,
        ];
        let ga = element_grad_alpha(mesh, t, &fields.alpha);
        for a in 0..3 {
            res[2 * tri[a]] += area * (sig[0] * grads[a][0] + sig[2] * grads[a][1]);
            res[2 * tri[a] + 1] += area * (sig[1] * grads[a][1] + sig[2] * grads[a][0]);
            if let Some(p) = cfg.pressure {
                res[2 * tri[a]] += p * area / 3.0 * ga[0];
                res[2 * tri[a] + 1] += p * area / 3.0 * ga[1];
            }
        }
    }
    Ok(res)
}

/// Which elastic driving enters the phase-field equation.
enum Driving<'a> {
    TensileEnergy,
    History(&'a [f64]),
}

fn phasefield_assembly(
    mesh: &Mesh2D,
    cfg: &PhysicsConfig,
    fields: &NodalFields,
    dofs: &DofMap,
    driving: Driving,
) -> Result<(Vec<f64>, CsrMatrix)> {
    let mat = &cfg.material;
    let gc_cw = mat.toughness / cfg.model.c_w();
    let ell = mat.length_scale;
    let mut res = vec![0.0; dofs.n_free()];
    let mut trip = Triplets::new(dofs.n_free());
    for t in 0..mesh.n_triangles() {
        let (grads, area) = mesh.shape_gradients(t);
        if !(area > 0.0) {
            return Err(Error::Assembly(format!("triangle {t} has area {area}")));
        }
        let tri = mesh.triangles[t];
        let ac = centroid_value(mesh, t, &fields.alpha);
        let drive = match driving {
            Driving::TensileEnergy => {
                let eps = element_strain(mesh, t, &fields.u);
                strain_energy_split(cfg.split, eps, mat).psi_plus
            }
            Driving::History(h) => h[t],
        };
        let ga = element_grad_alpha(mesh, t, &fields.alpha);
        let am = midpoint_values(mesh, t, &fields.alpha);
        let pm = midpoint_values(mesh, t, &fields.alpha_prev);

        let mut local_r = [0.0; 3];
        let mut local_k = [[0.0; 3]; 3];
        for a in 0..3 {
            local_r[a] += area / 3.0 * cfg.g_prime(ac) * drive;
            local_r[a] += 2.0 * gc_cw * ell * area * (ga[0] * grads[a][0] + ga[1] * grads[a][1]);
            for b in 0..3 {
                local_k[a][b] += area / 9.0 * cfg.g_prime2(ac) * drive;
                local_k[a][b] +=
                    2.0 * gc_cw * ell * area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
            }
        }
        for m in 0..3 {
            let w = area / 3.0;
            let wp = gc_cw / ell * cfg.model.dissipation_prime(am[m]);
            let wpp = gc_cw / ell * cfg.model.dissipation_prime2(am[m]);
            let mut pen = 0.0;
            let mut pen_k = 0.0;
            if let IrreversibilityMode::PenaltyGamma(gamma) = cfg.irreversibility {
                pen += gamma * macaulay_neg(am[m] - pm[m]);
                pen_k += gamma * heaviside_neg(am[m] - pm[m]);
            }
            if let Some(rho) = cfg.recovery_rho {
                pen += rho * macaulay_neg(am[m]);
                pen_k += rho * heaviside_neg(am[m]);
            }
            for &a in &MIDPOINT_NODES[m] {
                local_r[a] += w * 0.5 * (wp + pen);
                for &b in &MIDPOINT_NODES[m] {
                    local_k[a][b] += w * 0.25 * (wpp + pen_k);
                }
            }
        }
        if let Some(p) = cfg.pressure {
            let tri_u = mesh.triangles[t];
            let mut uc = [0.0, 0.0];
            for a in 0..3 {
                uc[0] += fields.u[2 * tri_u[a]] / 3.0;
                uc[1] += fields.u[2 * tri_u[a] + 1] / 3.0;
            }
            for a in 0..3 {
                local_r[a] += p * area * (uc[0] * grads[a][0] + uc[1] * grads[a][1]);
            }
        }
        for a in 0..3 {
            let Some(ri) = dofs.free(tri[a]) else { continue };
            res[ri] += local_r[a];
            for b in 0..3 {
                if let Some(ci) = dofs.free(tri[b]) {
                    trip.push(ri, ci, local_k[a][b]);
                }
            }
        }
    }
    Ok((res, trip.into_csr()))
}

/// Residual and tangent of the phase-field equation on the free dofs.
/// In history-field mode the caller must have refreshed `fields.history`.
pub fn assemble_phasefield(
    mesh: &Mesh2D,
    cfg: &PhysicsConfig,
    fields: &NodalFields,
    dofs: &DofMap,
) -> Result<(Vec<f64>, CsrMatrix)> {
    match cfg.irreversibility {
        IrreversibilityMode::PenaltyGamma(_) => {
            phasefield_assembly(mesh, cfg, fields, dofs, Driving::TensileEnergy)
        }
        IrreversibilityMode::HistoryField => {
            phasefield_assembly(mesh, cfg, fields, dofs, Driving::History(&fields.history))
        }
    }
}

/// The physics configuration equivalent to the crack-recovery problem:
/// no elastic driving, plus the rho-penalty for the linear model.
pub fn recovery_config(
    material: &MaterialSpec,
    model: ModelKind,
    rho: Option<f64>,
) -> Result<PhysicsConfig> {
    if model == ModelKind::At1 && !matches!(rho, Some(r) if r > 0.0) {
        return Err(Error::Config(
            "the linear model requires a positive recovery penalty rho".into(),
        ));
    }
    let mut cfg = PhysicsConfig::new(
        *material,
        model,
        SplitKind::NoSplit,
        IrreversibilityMode::HistoryField,
    );
    cfg.recovery_rho = match model {
        ModelKind::At1 => rho,
        ModelKind::At2 => None,
    };
    Ok(cfg)
}

/// Residual and tangent of the crack-recovery problem for the initial
/// phase field: minimize the surface energy with alpha = 1 on the crack
/// nodes; the linear model needs the rho-penalty to keep alpha >= 0.
pub fn assemble_recovery(
    mesh: &Mesh2D,
    material: &MaterialSpec,
    model: ModelKind,
    rho: Option<f64>,
    alpha: &[f64],
    dofs: &DofMap,
) -> Result<(Vec<f64>, CsrMatrix)> {
    let cfg = recovery_config(material, model, rho)?;
    let fields = NodalFields {
        u: vec![0.0; 2 * mesh.n_nodes()],
        alpha: alpha.to_vec(),
        alpha_prev: vec![0.0; mesh.n_nodes()],
        history: vec![0.0; mesh.n_triangles()],
    };
    phasefield_assembly(mesh, &cfg, &fields, dofs, Driving::History(&fields.history))
}

/// Per-element history update H <- max(H, Psi+). Idempotent.
pub fn update_history(mesh: &Mesh2D, cfg: &PhysicsConfig, fields: &mut NodalFields) {
    for t in 0..mesh.n_triangles() {
        let eps = element_strain(mesh, t, &fields.u);
        let s = strain_energy_split(cfg.split, eps, &cfg.material);
        if s.psi_plus > fields.history[t] {
            fields.history[t] = s.psi_plus;
        }
    }
}

/// Fracture surface energy E_S of a phase field alone.
pub fn surface_energy(mesh: &Mesh2D, material: &MaterialSpec, model: ModelKind, alpha: &[f64]) -> f64 {
    let gc_cw = material.toughness / model.c_w();
    let ell = material.length_scale;
    let mut e = 0.0;
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let ga = element_grad_alpha(mesh, t, alpha);
        e += gc_cw * ell * area * (ga[0] * ga[0] + ga[1] * ga[1]);
        let am = midpoint_values(mesh, t, alpha);
        for m in 0..3 {
            e += gc_cw / ell * area / 3.0 * model.dissipation(am[m]);
        }
    }
    e
}

/// Horizontal reaction force on a Dirichlet boundary: the sum of the
/// unconstrained-equation residual entries at its constrained dofs.
pub fn reaction_force(
    mesh: &Mesh2D,
    cfg: &PhysicsConfig,
    fields: &NodalFields,
    dofs: &DofMap,
    label: BoundaryLabel,
) -> Result<f64> {
    let nodes = mesh.boundary_nodes(label);
    if nodes.is_empty() {
        return Err(Error::Domain(format!("no boundary edges labeled {label}")));
    }
    let full = displacement_residual_full(mesh, cfg, fields)?;
    let mut f = 0.0;
    for n in nodes {
        if dofs.is_constrained(2 * n) {
            f += full[2 * n];
        }
    }
    Ok(f)
}

/// Crack opening displacement at the given stations: for each station x,
/// integrates -u . grad(alpha) along the vertical chord of the domain.
pub fn cod_profile(
    mesh: &Mesh2D,
    fields: &NodalFields,
    stations: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(stations.len());
    for &x0 in stations {
        let mut acc = 0.0;
        let mut hit = false;
        for t in 0..mesh.n_triangles() {
            let tri = mesh.triangles[t];
            let pts = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
            // intersect the vertical line x = x0 with the triangle edges
            let mut ys: Vec<f64> = Vec::with_capacity(2);
            let mut on_edge = false;
            for e in 0..3 {
                let p = pts[e];
                let q = pts[(e + 1) % 3];
                let (dx0, dx1) = (p[0] - x0, q[0] - x0);
                if dx0 == 0.0 && dx1 == 0.0 {
                    // edge lies on the line: its endpoints bound the chord, but
                    // the triangle sits entirely on one side, so its constant
                    // grad(alpha) is a one-sided limit; the neighbor across the
                    // edge contributes the other limit, and each gets half
                    // weight so the pair averages instead of double-counting
                    ys.push(p[1]);
                    ys.push(q[1]);
                    on_edge = true;
                } else if (dx0 <= 0.0 && dx1 > 0.0) || (dx0 > 0.0 && dx1 <= 0.0) {
                    let s = dx0 / (dx0 - dx1);
                    ys.push(p[1] + s * (q[1] - p[1]));
                }
            }
            if ys.len() < 2 {
                continue;
            }
            let ymin = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let ymax = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let len = ymax - ymin;
            if len <= 0.0 {
                continue;
            }
            hit = true;
            // integrand is linear along the chord: midpoint rule is exact
            let ymid = 0.5 * (ymin + ymax);
            let ga = element_grad_alpha(mesh, t, &fields.alpha);
            let (grads, area) = mesh.shape_gradients(t);
            let _ = area;
            // P1 interpolation of u at (x0, ymid) via barycentric weights
            let mut w = [0.0; 3];
            for a in 0..3 {
                // N_a(x) = N_a(c) + grad N_a . (x - c) with c the centroid
                let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
                let cy = (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0;
                w[a] = 1.0 / 3.0 + grads[a][0] * (x0 - cx) + grads[a][1] * (ymid - cy);
            }
            let mut u = [0.0, 0.0];
            for a in 0..3 {
                u[0] += w[a] * fields.u[2 * tri[a]];
                u[1] += w[a] * fields.u[2 * tri[a] + 1];
            }
            let weight = if on_edge { 0.5 } else { 1.0 };
            acc -= weight * len * (u[0] * ga[0] + u[1] * ga[1]);
        }
        if !hit {
            return Err(Error::Domain(format!("station x = {x0} lies outside the mesh")));
        }
        out.push((x0, acc));
    }
    Ok(out)
}
