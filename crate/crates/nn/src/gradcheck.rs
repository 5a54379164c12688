//! Central finite-difference gradient checking, independent of any backward
//! pass: it only ever calls the supplied loss closure.

/// Outcome of a full-vector gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub checked: usize,
    pub skipped: usize,
    pub max_rel_err: f64,
}

/// Compare `analytic` against central differences of `loss` around `theta`.
///
/// Coordinates where the two-step-size probe disagrees (the loss is not
/// locally smooth there, e.g. a relu kink straddles the probe interval) are
/// skipped rather than checked; finite differences carry no information at
/// such points. At most 20% of coordinates may be skipped.
pub fn check_gradients<F>(
    mut loss: F,
    theta: &[f64],
    analytic: &[f64],
    eps: f64,
    rtol: f64,
    atol: f64,
) -> Result<GradCheckReport, String>
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(theta.len(), analytic.len(), "gradient length mismatch");
    let mut probe = theta.to_vec();
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut max_rel_err = 0.0f64;

    for i in 0..theta.len() {
        let x0 = theta[i];
        let mut fd_at = |h: f64| {
            probe[i] = x0 + h;
            let fp = loss(&probe);
            probe[i] = x0 - h;
            let fm = loss(&probe);
            probe[i] = x0;
            (fp - fm) / (2.0 * h)
        };
        let d_full = fd_at(eps);
        let d_half = fd_at(eps / 2.0);

        let scale = d_full.abs().max(d_half.abs()).max(analytic[i].abs());
        if (d_full - d_half).abs() > 10.0 * (rtol * scale + atol) {
            skipped += 1;
            continue;
        }

        let err = (analytic[i] - d_half).abs();
        let bound = rtol * analytic[i].abs().max(d_half.abs()) + atol;
        if err > bound {
            return Err(format!(
                "gradient mismatch at coordinate {i}: analytic {} vs finite-difference {} (err {err:.3e} > bound {bound:.3e})",
                analytic[i], d_half
            ));
        }
        if scale > 0.0 {
            max_rel_err = max_rel_err.max(err / scale.max(atol));
        }
        checked += 1;
    }

    if theta.len() >= 5 && skipped * 5 > theta.len() {
        return Err(format!(
            "too many non-smooth coordinates: skipped {skipped} of {}",
            theta.len()
        ));
    }
    Ok(GradCheckReport {
        checked,
        skipped,
        max_rel_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_exact_gradients_of_a_quadratic() {
        let theta = [1.0, -2.0, 0.5];
        let loss = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let analytic: Vec<f64> = theta.iter().map(|v| 2.0 * v).collect();
        let rep = check_gradients(loss, &theta, &analytic, 1e-5, 1e-4, 1e-8).unwrap();
        assert_eq!(rep.checked, 3);
        assert_eq!(rep.skipped, 0);
    }

    #[test]
    fn rejects_wrong_gradients() {
        let theta = [1.0, -2.0];
        let loss = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let analytic = [2.0, 4.0]; // second is wrong sign
        assert!(check_gradients(loss, &theta, &analytic, 1e-5, 1e-4, 1e-8).is_err());
    }

    #[test]
    fn skips_kink_coordinates() {
        // |x| has a kink at 0; the probe straddles it for the first coordinate
        let theta = [2e-6, 1.0];
        let loss = |x: &[f64]| x.iter().map(|v| v.abs()).sum::<f64>();
        let analytic = [1.0, 1.0];
        let rep = check_gradients(loss, &theta, &analytic, 1e-5, 1e-4, 1e-8).unwrap();
        assert_eq!(rep.skipped, 1);
        assert_eq!(rep.checked, 1);
    }
}
