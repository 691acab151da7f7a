use crate::error::{Error, Result};

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && t.is_finite() && (0.0..=horizon).contains(&t)) {
        return Err(Error::InvalidParameter(format!("time {t} outside [0, {horizon}]")));
    }
    Ok(())
}

/// Rising part of the blend on `[0, 1]`: `p(0) = 0`, `p'(0) = 1`, `p''(0) = 0`, `p(1) = 1/4`,
/// `p'(1) = p''(1) = 0`, and `p' = (1-τ)^6 (1+6τ) ≥ 0`.
fn blend(tau: f64) -> f64 {
    let u = 1.0 - tau;
    0.25 - u.powi(7) + 0.75 * u.powi(8)
}

/// Time cutoff `l(t)`: `t` near 0, `T - t` near `T`, a C² monotone plateau reaching `5T/16` at `T/2`.
pub fn l_of_t(t: f64, horizon: f64) -> Result<f64> {
    check_time(t, horizon)?;
    let q = horizon / 4.0;
    let s = t.min(horizon - t);
    Ok(if s <= q { s } else { q + q * blend((s - q) / q) })
}

/// `l̄(t)`: `l(T/2)` on `[0, T/2]`, `l(t)` afterwards.
pub fn l_bar(t: f64, horizon: f64) -> Result<f64> {
    check_time(t, horizon)?;
    if t <= 0.5 * horizon {
        Ok(5.0 * horizon / 16.0)
    } else {
        l_of_t(t, horizon)
    }
}

/// `t² (T - t)²`.
pub fn bubble(t: f64, horizon: f64) -> Result<f64> {
    check_time(t, horizon)?;
    Ok((t * (horizon - t)).powi(2))
}

/// `l̃(t)`: `T⁴/16` on `[0, T/2]`, `t² (T - t)²` afterwards.
pub fn l_tilde(t: f64, horizon: f64) -> Result<f64> {
    check_time(t, horizon)?;
    if t <= 0.5 * horizon {
        Ok(horizon.powi(4) / 16.0)
    } else {
        bubble(t, horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ramps_and_plateau() {
        let t = 2.0;
        assert_eq!(l_of_t(t / 8.0, t).unwrap(), t / 8.0);
        assert!((l_of_t(7.0 * t / 8.0, t).unwrap() - t / 8.0).abs() < 1e-15);
        assert!((l_of_t(t / 2.0, t).unwrap() - 5.0 * t / 16.0).abs() < 1e-15);
        let peak = 5.0 * t / 16.0;
        for i in 0..=4000 {
            let s = t * i as f64 / 4000.0;
            assert!(l_of_t(s, t).unwrap() <= peak + 1e-15);
        }
    }

    #[test]
    fn monotone_on_first_half_and_c2_at_joins() {
        let big_t = 1.0;
        let mut prev = -1.0;
        for i in 0..=2000 {
            let t = 0.5 * big_t * i as f64 / 2000.0;
            let v = l_of_t(t, big_t).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let h = 1e-5;
        let d2 = |t: f64| (l_of_t(t + h, big_t).unwrap() - 2.0 * l_of_t(t, big_t).unwrap() + l_of_t(t - h, big_t).unwrap()) / (h * h);
        let d1 = |t: f64| (l_of_t(t + h, big_t).unwrap() - l_of_t(t - h, big_t).unwrap()) / (2.0 * h);
        assert!((d1(0.25) - 1.0).abs() < 1e-6);
        assert!(d2(0.25).abs() < 1e-2);
        assert!(d1(0.5).abs() < 1e-8);
        assert!((d1(0.75) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn truncations() {
        assert_eq!(l_bar(0.1, 1.0).unwrap(), l_bar(0.5, 1.0).unwrap());
        assert_eq!(l_tilde(0.2, 1.0).unwrap(), 1.0 / 16.0);
        assert_eq!(bubble(0.5, 1.0).unwrap(), 1.0 / 16.0);
        assert!(l_of_t(1.5, 1.0).is_err());
    }
}
