use super::form_duality;
use crate::error::{GeomError, Result};
use crate::jets::{Evaluator, Expr};
use crate::spinor::{frame_metric_at, TetradFrame};

/// Null coframe of a symbolic neutral metric by a symmetric pivoted LDL
/// decomposition g = Σ d_k ℓ_k⊗ℓ_k. Pivot order and signs are fixed at
/// `reference`; positive and negative squares are paired into null forms.
pub fn null_coframe_ldl(g: &[[Expr; 4]; 4], reference: &[f64]) -> Result<[[Expr; 4]; 4]> {
    let mut s: Vec<Vec<Expr>> = g.iter().map(|r| r.to_vec()).collect();
    let mut left: Vec<usize> = (0..4).collect();
    let mut pos: Vec<(Expr, [Expr; 4])> = Vec::new();
    let mut neg: Vec<(Expr, [Expr; 4])> = Vec::new();
    while !left.is_empty() {
        let mut ev = Evaluator::new(reference);
        let mut best = (0, 0.0_f64, 0.0_f64);
        for (slot, &i) in left.iter().enumerate() {
            let v = ev.eval(&s[i][i])?;
            if v.abs() > best.1.abs() || slot == 0 {
                best = (slot, v, v);
            }
        }
        let (slot, d_val, _) = best;
        if d_val.abs() < 1e-10 {
            return Err(GeomError::Degenerate(
                "zero pivot in null coframe decomposition".into(),
            ));
        }
        let i = left.remove(slot);
        let d = s[i][i].clone();
        let l: [Expr; 4] = std::array::from_fn(|j| {
            if left.contains(&j) || j == i {
                &s[i][j] / &d
            } else {
                Expr::zero()
            }
        });
        for &a in &left {
            for &b in &left {
                s[a][b] = &s[a][b] - &(&d * &(&l[a] * &l[b]));
            }
        }
        if d_val > 0.0 {
            pos.push((d.sqrt(), l));
        } else {
            neg.push(((-d).sqrt(), l));
        }
    }
    if pos.len() != 2 || neg.len() != 2 {
        return Err(GeomError::Degenerate(format!(
            "signature ({}, {}) is not neutral",
            pos.len(),
            neg.len()
        )));
    }
    let comb = |p: &(Expr, [Expr; 4]), n: &(Expr, [Expr; 4]), sn: f64, scale: f64| -> [Expr; 4] {
        std::array::from_fn(|j| scale * (&p.0 * &p.1[j] + sn * (&n.0 * &n.1[j])))
    };
    // 2e⁰⊙e³ = a² − b², −2e²⊙e¹ = c² − d²
    Ok([
        comb(&pos[0], &neg[0], 1.0, 1.0),
        comb(&pos[1], &neg[1], -1.0, -0.5),
        comb(&pos[1], &neg[1], 1.0, 1.0),
        comb(&pos[0], &neg[0], -1.0, 0.5),
    ])
}

/// Swap e^{01'} and e^{10'} if needed so that ω is self-dual for the frame
/// orientation at the reference point.
pub fn orient_by_sd_form(frame: TetradFrame, omega: &[[Expr; 4]; 4]) -> Result<TetradFrame> {
    let p = frame.reference.clone();
    let g = frame_metric_at(&frame, &p)?;
    let mut ev = Evaluator::new(&p);
    let mut w = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            w[a][b] = ev.eval(&omega[a][b])?;
        }
    }
    match form_duality(&g, frame.orientation_at(&p)?, &w)? {
        s if s > 0.0 => Ok(frame),
        s if s < 0.0 => {
            let swap: [[f64; 4]; 4] = std::array::from_fn(|k| {
                std::array::from_fn(|l| {
                    let t = match k {
                        1 => 2,
                        2 => 1,
                        k => k,
                    };
                    if l == t {
                        1.0
                    } else {
                        0.0
                    }
                })
            });
            frame.transformed(&swap)
        }
        _ => Err(GeomError::Degenerate(
            "form is neither self-dual nor anti-self-dual".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricField;
    use crate::spinor::verify_tetrad;

    #[test]
    fn ldl_coframe_reproduces_metric() {
        let x = Expr::var;
        let g: [[Expr; 4]; 4] = [
            [
                1.0 + x(1) * x(1),
                0.3 * x(2),
                Expr::zero(),
                0.1 * Expr::one(),
            ],
            [0.3 * x(2), Expr::constant(2.0), 0.2 * x(0), Expr::zero()],
            [
                Expr::zero(),
                0.2 * x(0),
                -1.0 - x(3) * x(3),
                0.5 * Expr::one(),
            ],
            [
                0.1 * Expr::one(),
                Expr::zero(),
                0.5 * Expr::one(),
                Expr::constant(-3.0),
            ],
        ];
        let r = vec![0.1, 0.2, 0.3, 0.4];
        let c = null_coframe_ldl(&g, &r).unwrap();
        let fr = TetradFrame::from_coframe(c, r.clone());
        let m = MetricField::covariant(g.iter().map(|row| row.to_vec()).collect());
        let samples = vec![r, vec![-0.2, 0.1, 0.05, 0.3], vec![0.3, -0.4, 0.2, -0.1]];
        assert!(verify_tetrad(&m, &fr, &samples, 1e-12).passed());
    }

    #[test]
    fn definite_metric_is_rejected() {
        let g: [[Expr; 4]; 4] = std::array::from_fn(|a| {
            std::array::from_fn(|b| Expr::constant(if a == b { 1.0 } else { 0.0 }))
        });
        assert!(null_coframe_ldl(&g, &[0.0; 4]).is_err());
    }
}
