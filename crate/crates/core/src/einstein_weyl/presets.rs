use super::{
    dkp_ew, ew_residual, jones_tod_lift, monopole_residual, toda_ew, EWStructure, MonopoleData,
};
use crate::error::{GeomError, Result};
use crate::geometry::{asd_residual, curvature_pack, MetricField};
use crate::jets::{parse_expr, DomainBox, Expr};
use crate::report::ResidualReport;
use crate::sampling::halton_box;
use crate::zoo::tod_eta0;

fn xyt(s: &str) -> Expr {
    parse_expr(s, &["x", "y", "t"]).expect("preset expression parses")
}

/// Tod's Toda solution u = ln[4(1 − t²)/(1 + x² + y²)²] with V = u_t,
/// η = 2η₀, on a box in t < 0 where V > 0.
pub fn tod_toda() -> (EWStructure, MonopoleData) {
    let u = xyt("ln(4*(1-t^2)/(1+x^2+y^2)^2)");
    let ew = toda_ew(&u).with_domain(DomainBox::new(vec![-1.0, -1.0, -0.8], vec![1.0, 1.0, -0.1]));
    let m = MonopoleData::new(u.diff(2), tod_eta0().map(|e| 2.0 * e));
    (ew, m)
}

/// dKP background u = −x/t with the monopole of W = −x/t (H = −x²/2t):
/// V = W_x, η = −W_x dy − 2W_y dt.
pub fn dkp_similarity() -> (EWStructure, MonopoleData) {
    let w = xyt("-x/t");
    let ew = dkp_ew(&w).with_domain(DomainBox::new(vec![-1.0, -1.0, -2.0], vec![1.0, 1.0, -0.5]));
    let eta = [Expr::zero(), -w.diff(0), -2.0 * w.diff(1)];
    (ew, MonopoleData::new(w.diff(0), eta))
}

pub fn preset(name: &str) -> Result<(EWStructure, MonopoleData)> {
    match name {
        "toda" | "tod" => Ok(tod_toda()),
        "dkp" => Ok(dkp_similarity()),
        _ => Err(GeomError::Unknown(name.into())),
    }
}

/// Samples of the lifted metric's box (φ included).
pub fn lift_samples(g: &MetricField, n: usize, seed: u64) -> Vec<Vec<f64>> {
    halton_box(&g.domain, n, seed, |p| g.admissible::<4>(p))
}

/// Checks the 3D data, lifts, and checks the lift: Einstein-Weyl and
/// monopole residuals on the base, ASD and Ricci-flatness (of V⁻²g) upstairs.
pub fn lift_reports(
    ew: &EWStructure,
    m: &MonopoleData,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let s3 = ew.samples(n, seed);
    let mut out = vec![
        ew_residual(ew, &s3, tol),
        monopole_residual(ew, m, &s3, tol),
    ];
    let g = jones_tod_lift(ew, m)?;
    let s4 = lift_samples(&g, n, seed);
    out.push(asd_residual(&g, &s4, tol));
    let rf = g.conformal(&(-m.v.ln()));
    let r: Vec<f64> = s4
        .iter()
        .map(|p| curvature_pack::<4>(&rf, p).map_or(f64::INFINITY, |c| c.ricci_max()))
        .collect();
    out.push(ResidualReport::from_residuals("ricci-flat", &r, tol).with_note("gauge V^-2 g"));
    Ok(out)
}
