use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dsp::spectra::mean_and_stderr;
use crate::dsp::SpectralEstimate;
use crate::error::{Error, Result};

/// Coherence below which a phase fit is reported as ill-determined.
const WEAK_COHERENCE: f64 = 0.01;

/// Balanced spectra `[segment][band bin]`.
pub type Balanced = Vec<Vec<Complex64>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFit {
    pub alpha: Complex64,
    /// Segment- and band-averaged `|I_k - alpha I_-k|^2` at the optimum.
    pub min_power: f64,
    /// Magnitude-squared coherence of the two channels over the band.
    pub coherence: f64,
    pub weak_coherence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFit {
    pub beta: Complex64,
    pub min_power: f64,
    /// Set when the second pair carries no signal or no coherence.
    pub degenerate: bool,
}

/// Minimizes a `2 pi`-periodic function: grid over `[-pi, pi)` then golden
/// section around the best grid point, to `1e-7` rad.
pub fn minimize_phase(f: impl Fn(f64) -> f64) -> f64 {
    const GRID: usize = 720;
    let step = 2.0 * PI / GRID as f64;
    let best = (0..GRID)
        .map(|i| -PI + i as f64 * step)
        .min_by(|a, b| f(*a).partial_cmp(&f(*b)).unwrap())
        .unwrap();
    let (mut lo, mut hi) = (best - step, best + step);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-7 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Band-averaged second moments `(<|a|^2>, <|b|^2>, <conj(a) b>)`.
fn moments(a: &Balanced, b: &Balanced) -> (f64, f64, Complex64) {
    let mut paa = 0.0;
    let mut pbb = 0.0;
    let mut x = Complex64::new(0.0, 0.0);
    let mut n = 0usize;
    for (sa, sb) in a.iter().zip(b) {
        for (u, v) in sa.iter().zip(sb) {
            paa += u.norm_sqr();
            pbb += v.norm_sqr();
            x += u.conj() * v;
            n += 1;
        }
    }
    let n = n.max(1) as f64;
    (paa / n, pbb / n, x / n)
}

/// Raw channel spectra restricted to `band`, `[segment][bin]`.
pub fn channel_band(est: &SpectralEstimate, channel: usize, band: &[usize]) -> Balanced {
    est.spectra
        .iter()
        .map(|seg| band.iter().map(|&b| seg[channel][b]).collect())
        .collect()
}

/// `|alpha|` pinned to `dc_k / dc_-k`; its phase minimizes the band power
/// of `I_k - alpha I_-k`. Below the weak-coherence level the phase is
/// set to zero.
pub fn fit_alpha(
    ik: &Balanced,
    imk: &Balanced,
    dc_k: f64,
    dc_mk: f64,
    label: &str,
) -> Result<AlphaFit> {
    if !(dc_k > 0.0) || !(dc_mk > 0.0) {
        return Err(Error::ZeroDc(label.to_string()));
    }
    let r = dc_k / dc_mk;
    let (paa, pbb, x) = moments(ik, imk);
    let objective =
        |phi: f64| paa + r * r * pbb - 2.0 * r * (x * Complex64::from_polar(1.0, phi)).re;
    let coherence = if paa > 0.0 && pbb > 0.0 {
        x.norm_sqr() / (paa * pbb)
    } else {
        0.0
    };
    let phi = if coherence < WEAK_COHERENCE {
        0.0
    } else {
        minimize_phase(objective)
    };
    Ok(AlphaFit {
        alpha: Complex64::from_polar(r, phi),
        min_power: objective(phi).max(0.0),
        coherence,
        weak_coherence: coherence < WEAK_COHERENCE,
    })
}

/// `|alpha|` and phase both free (least squares).
pub fn fit_alpha_free(ik: &Balanced, imk: &Balanced) -> Complex64 {
    let (_, pbb, x) = moments(ik, imk);
    if pbb == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    x.conj() / pbb
}

/// `I_k - alpha I_-k` per segment and bin.
pub fn balance(ik: &Balanced, imk: &Balanced, alpha: Complex64) -> Balanced {
    ik.iter()
        .zip(imk)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - alpha * v).collect())
        .collect()
}

/// Weighted combination `w1 d1 + w2 beta d2`.
pub fn combine(d1: &Balanced, d2: &Balanced, beta: Complex64, weights: (f64, f64)) -> Balanced {
    d1.iter()
        .zip(d2)
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(u, v)| weights.0 * u + weights.1 * beta * v)
                .collect()
        })
        .collect()
}

/// `beta` minimizing the band power of `w1 d1 + w2 beta d2`; unit modulus
/// unless `free_modulus`.
pub fn fit_beta(d1: &Balanced, d2: &Balanced, weights: (f64, f64), free_modulus: bool) -> BetaFit {
    let (w1, w2) = weights;
    let (p11, p22, x) = moments(d1, d2);
    let objective =
        |b: Complex64| w1 * w1 * p11 + w2 * w2 * b.norm_sqr() * p22 + 2.0 * w1 * w2 * (x * b).re;
    let coherence = if p11 > 0.0 && p22 > 0.0 {
        x.norm_sqr() / (p11 * p22)
    } else {
        0.0
    };
    if p22 == 0.0 || w2 == 0.0 {
        let beta = Complex64::new(1.0, 0.0);
        return BetaFit {
            beta,
            min_power: objective(beta).max(0.0),
            degenerate: true,
        };
    }
    let beta = if free_modulus {
        -x.conj() * w1 / (w2 * p22)
    } else {
        Complex64::from_polar(
            1.0,
            minimize_phase(|phi| objective(Complex64::from_polar(1.0, phi))),
        )
    };
    BetaFit {
        beta,
        min_power: objective(beta).max(0.0),
        degenerate: coherence < WEAK_COHERENCE,
    }
}

/// Segment-averaged band power with standard error over segments.
pub fn band_power(series: &Balanced) -> (f64, f64) {
    let per_segment: Vec<f64> = series
        .iter()
        .map(|s| s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len().max(1) as f64)
        .collect();
    mean_and_stderr(&per_segment)
}

/// Variances (with standard errors) of `C`, `Delta_1` and `Delta_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedVariance {
    pub carlos: (f64, f64),
    pub delta: [(f64, f64); 2],
}

pub fn combined_variance(
    d1: &Balanced,
    d2: &Balanced,
    beta: Complex64,
    weights: (f64, f64),
) -> CombinedVariance {
    CombinedVariance {
        carlos: band_power(&combine(d1, d2, beta, weights)),
        delta: [band_power(d1), band_power(d2)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(usize, usize) -> Complex64) -> Balanced {
        (0..6).map(|s| (0..5).map(|b| f(s, b)).collect()).collect()
    }

    fn pseudo(s: usize, b: usize, salt: f64) -> Complex64 {
        let t = (s * 7 + b * 13) as f64 + salt;
        Complex64::new((t * 1.3).sin(), (t * 0.7).cos())
    }

    #[test]
    fn identical_channels_balance_exactly() {
        let a = series(|s, b| pseudo(s, b, 0.0));
        let fit = fit_alpha(&a, &a, 2.0, 2.0, "x").unwrap();
        assert!((fit.alpha - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(fit.min_power < 1e-12);
    }

    #[test]
    fn phase_matches_closed_form() {
        let a = series(|s, b| pseudo(s, b, 0.0));
        let rot = Complex64::from_polar(1.0, 1.234);
        let b = series(|s, bb| pseudo(s, bb, 0.0) * rot + 0.3 * pseudo(s, bb, 5.0));
        let fit = fit_alpha(&a, &b, 1.0, 1.0, "x").unwrap();
        let (_, _, x) = moments(&a, &b);
        let expected = (-x.arg() + PI).rem_euclid(2.0 * PI) - PI;
        assert!((fit.alpha.arg() - expected).abs() < 1e-6);
    }

    #[test]
    fn zero_dc_is_an_error() {
        let a = series(|s, b| pseudo(s, b, 0.0));
        assert!(matches!(
            fit_alpha(&a, &a, 0.0, 1.0, "-1"),
            Err(Error::ZeroDc(_))
        ));
    }

    #[test]
    fn silent_second_pair_gives_unit_beta() {
        let d1 = series(|s, b| pseudo(s, b, 1.0));
        let d2 = series(|_, _| Complex64::new(0.0, 0.0));
        let fit = fit_beta(&d1, &d2, (1.0, 2.0), false);
        assert!(fit.degenerate);
        assert_eq!(fit.beta, Complex64::new(1.0, 0.0));
        let cv = combined_variance(&d1, &d2, fit.beta, (1.0, 2.0));
        assert_eq!(cv.carlos, cv.delta[0]);
    }

    #[test]
    fn anticorrelated_pairs_cancel() {
        let d1 = series(|s, b| pseudo(s, b, 2.0));
        let rot = Complex64::from_polar(1.0, -0.4);
        let d2 = series(|s, b| -pseudo(s, b, 2.0) * 0.5 * rot);
        let fit = fit_beta(&d1, &d2, (1.0, 2.0), false);
        let c = band_power(&combine(&d1, &d2, fit.beta, (1.0, 2.0))).0;
        assert!(c <= 1e-3 * band_power(&d1).0, "{c}");
        assert!((fit.beta.arg() - 0.4).abs() < 1e-6);
    }
}
