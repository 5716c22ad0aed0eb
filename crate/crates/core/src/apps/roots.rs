//! Derivative-free real root isolation on an interval.

/// Number of uniform brackets before refinement.
pub const INITIAL_BRACKETS: usize = 256;

/// Neighbouring samples whose magnitudes differ by more than this factor
/// get their interval split in three.
pub const REFINE_RATIO: f64 = 10.0;

/// Maximum number of refinement passes.
pub const REFINE_DEPTH: usize = 3;

/// Evaluate ascending coefficients `c[0] + c[1] t + …` by Horner.
pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn needs_split(fa: f64, fb: f64) -> bool {
    let (a, b) = (fa.abs(), fb.abs());
    if a == 0.0 || b == 0.0 {
        return false;
    }
    a > REFINE_RATIO * b || b > REFINE_RATIO * a
}

/// Sample `f` on `[t0, t1]`: a uniform grid, then up to `REFINE_DEPTH`
/// passes that triple the grid wherever neighbouring magnitudes differ by
/// more than `REFINE_RATIO`.
pub fn adaptive_samples(f: &impl Fn(f64) -> f64, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let h = (t1 - t0) / INITIAL_BRACKETS as f64;
    let mut samples: Vec<(f64, f64)> = (0..=INITIAL_BRACKETS)
        .map(|i| {
            let t = if i == INITIAL_BRACKETS { t1 } else { t0 + i as f64 * h };
            (t, f(t))
        })
        .collect();
    for _ in 0..REFINE_DEPTH {
        let mut next = Vec::with_capacity(samples.len());
        let mut split_any = false;
        for w in samples.windows(2) {
            let ((ta, fa), (tb, fb)) = (w[0], w[1]);
            next.push((ta, fa));
            if needs_split(fa, fb) {
                split_any = true;
                for k in 1..3 {
                    let t = ta + (tb - ta) * k as f64 / 3.0;
                    next.push((t, f(t)));
                }
            }
        }
        next.push(*samples.last().unwrap());
        samples = next;
        if !split_any {
            break;
        }
    }
    samples
}

/// Bisect a sign-changing bracket down to `tol` width.
pub fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

// Golden-section minimum of `s·f` on `[a, b]`.
fn dip(f: &impl Fn(f64) -> f64, s: f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let g = |t: f64| s * f(t);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > tol {
        if gc < 0.0 {
            return (c, gc);
        }
        if gd < 0.0 {
            return (d, gd);
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, g(m))
}

/// Real roots of `f` in `[t0, t1]` found by sign changes between samples
/// (plus samples that evaluate to exactly zero), refined to
/// `1e-12·(t1 - t0)`. A local minimum of `|f|` among the samples is probed
/// for a hidden sign change, which catches two close roots sharing one
/// bracket. Roots of even multiplicity are reported only when a sample lands
/// on them exactly.
pub fn find_roots(f: impl Fn(f64) -> f64, t0: f64, t1: f64) -> Vec<f64> {
    let tol = 1e-12 * (t1 - t0);
    let samples = adaptive_samples(&f, t0, t1);
    let mut roots = Vec::new();
    for (i, &(t, v)) in samples.iter().enumerate() {
        if v == 0.0 {
            roots.push(t);
            continue;
        }
        if i > 0 && i + 1 < samples.len() {
            let ((tp, vp), (tn, vn)) = (samples[i - 1], samples[i + 1]);
            let same = |w: f64| w != 0.0 && (w > 0.0) == (v > 0.0);
            if same(vp) && same(vn) && v.abs() < vp.abs() && v.abs() < vn.abs() {
                let s = v.signum();
                let (m, gm) = dip(&f, s, tp, tn, tol);
                if gm < 0.0 {
                    let lo = bisect(&f, tp, m, vp, tol);
                    let hi = bisect(&f, m, tn, s * gm, tol);
                    roots.extend([lo, hi]);
                }
            }
        }
        if let Some(&(tn, vn)) = samples.get(i + 1) {
            if vn != 0.0 && (v > 0.0) != (vn > 0.0) {
                roots.push(bisect(&f, t, tn, v, tol));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots_of_quartic() {
        // (t - 0.1)(t + 0.5)(t - 0.7)(t + 2)
        let roots = [0.1, -0.5, 0.7, -2.0];
        let f = |t: f64| roots.iter().map(|r| t - r).product::<f64>();
        let found = find_roots(f, -1.0, 1.0);
        assert_eq!(found.len(), 3);
        for (got, want) in found.iter().zip([-0.5, 0.1, 0.7]) {
            assert!((got - want).abs() < 1e-11);
        }
    }

    #[test]
    fn exact_zero_sample_counts_once() {
        let found = find_roots(|t| t, -1.0, 1.0);
        assert_eq!(found, vec![0.0]);
    }

    #[test]
    fn refinement_separates_close_roots() {
        // two roots 1e-3 apart inside one coarse bracket [0.296875, 0.3046875],
        // where the endpoint magnitudes differ by more than 10x
        let f = |t: f64| (t - 0.297) * (t - 0.298);
        let coarse = find_roots_uniform(f, -1.0, 1.0);
        assert!(coarse.is_empty());
        let found = find_roots(f, -1.0, 1.0);
        assert_eq!(found.len(), 2, "{found:?}");
    }

    fn find_roots_uniform(f: impl Fn(f64) -> f64, t0: f64, t1: f64) -> Vec<f64> {
        let h = (t1 - t0) / INITIAL_BRACKETS as f64;
        (0..INITIAL_BRACKETS)
            .map(|i| (t0 + i as f64 * h, t0 + (i + 1) as f64 * h))
            .filter(|&(a, b)| f(a) * f(b) < 0.0)
            .map(|(a, _)| a)
            .collect()
    }

    #[test]
    fn probing_finds_pair_without_magnitude_jump() {
        // the bracket ends differ by less than 10x, so only the dip probe sees it
        let f = |t: f64| (t - 0.3001) * (t - 0.3011);
        assert!(find_roots_uniform(f, -1.0, 1.0).is_empty());
        let found = find_roots(f, -1.0, 1.0);
        assert_eq!(found.len(), 2, "{found:?}");
        assert!((found[0] - 0.3001).abs() < 1e-11 && (found[1] - 0.3011).abs() < 1e-11);
    }

    #[test]
    fn tangent_minimum_is_not_a_root() {
        assert!(find_roots(|t| (t - 0.3).powi(2) + 1e-9, -1.0, 1.0).is_empty());
    }

    #[test]
    fn no_roots_on_positive_function() {
        assert!(find_roots(|t| t * t + 1.0, -1.0, 1.0).is_empty());
    }

    #[test]
    fn horner_matches_naive() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let t = 0.7_f64;
        let naive = 1.0 - 2.0 * t + 0.5 * t * t + 3.0 * t.powi(3);
        assert!((horner(&c, t) - naive).abs() < 1e-15);
    }
}
