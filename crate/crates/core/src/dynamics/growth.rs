//! Phenology, leaf area, light interception, biomass and yield.

use super::params::{CropModel, CropParams};
use crate::num::Scalar;

/// Daily heat units, clamped at zero at or below the base temperature.
pub fn heat_units<T: Scalar>(t_mean: T, p: &CropParams<T>) -> T {
    (t_mean - p.t_base).max(T::zero())
}

/// Fraction of potential heat units accumulated. Not clamped at 1.
pub fn fraction_phu<T: Scalar>(hu_cum: T, p: &CropParams<T>) -> T {
    hu_cum / p.phu_total
}

/// Fraction of maximum leaf area reached at `fr_phu`, in `[0, 1)`.
pub fn fr_laimax<T: Scalar>(fr_phu: T, model: &CropModel<T>) -> T {
    model.curve().eval(fr_phu)
}

/// Advances leaf area index by one day.
///
/// Before senescence the increment is `K_f (1 - exp(5 (lai_prev - lai_max)))`
/// with `K_f = lai_max (fr_laimax(fr) - fr_laimax(fr_prev))`. After
/// senescence leaf area declines linearly in `fr_phu` from `lai_peak` to zero
/// at maturity, never rising above `lai_prev`.
pub fn lai_update<T: Scalar>(
    lai_prev: T,
    lai_peak: T,
    fr_phu_prev: T,
    fr_phu: T,
    model: &CropModel<T>,
) -> T {
    let p = model.params();
    let zero = T::zero();
    let next = if fr_phu <= p.fr_phu_sen {
        let k_f = p.lai_max * (fr_laimax(fr_phu, model) - fr_laimax(fr_phu_prev, model));
        let growth = T::one() - (T::lit(5.0) * (lai_prev - p.lai_max)).exp();
        lai_prev + k_f * growth
    } else {
        let span = T::one() - p.fr_phu_sen;
        let declined = if span > zero {
            lai_peak * (T::one() - fr_phu) / span
        } else {
            zero
        };
        declined.clamp_to(zero, lai_prev)
    };
    next.clamp_to(zero, p.lai_max)
}

/// Intercepted photosynthetically active radiation (Beer's law), MJ/m².
pub fn light_interception<T: Scalar>(solar: T, lai: T, p: &CropParams<T>) -> T {
    T::lit(0.5) * solar * (T::one() - (-p.k_l * lai).exp())
}

/// Potential biomass increase, kg/ha.
pub fn potential_biomass_delta<T: Scalar>(h_phosyn: T, p: &CropParams<T>) -> T {
    p.rue * h_phosyn
}

/// Actual growth under the most limiting of the three stresses.
pub fn actual_growth<T: Scalar>(delta_bio_potential: T, n_strs: T, w_strs: T, t_strs: T) -> T {
    let limiting = n_strs.max(w_strs).max(t_strs).clamp_to(T::zero(), T::one());
    delta_bio_potential * (T::one() - limiting)
}

/// Potential harvest index for the day.
pub fn harvest_index<T: Scalar>(fr_phu: T, p: &CropParams<T>) -> T {
    if fr_phu <= T::zero() {
        return T::zero();
    }
    let hundred_fr = T::lit(100.0) * fr_phu;
    p.hi_opt * hundred_fr / (hundred_fr + (T::lit(11.1) - T::lit(10.0) * fr_phu).exp())
}

/// Fraction of total biomass held in roots, `0.4 - 0.2 fr_phu`, floored at 0.
pub fn root_fraction<T: Scalar>(fr_phu: T) -> T {
    (T::lit(0.4) - T::lit(0.2) * fr_phu).max(T::zero())
}

/// Estimated yield, kg/ha.
pub fn yield_estimate<T: Scalar>(bio: T, fr_phu: T, hi: T) -> T {
    let y = if hi <= T::one() {
        (T::one() - root_fraction(fr_phu)) * bio * hi
    } else {
        bio * hi / (hi + T::one())
    };
    y.max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn model() -> CropModel<f64> {
        CropModel::new(CropParams::default()).unwrap()
    }

    #[test]
    fn heat_units_examples() {
        let p = CropParams::<f64>::default();
        assert_eq!(heat_units(20.0, &p), 12.0);
        assert_eq!(heat_units(8.0, &p), 0.0);
        assert_eq!(heat_units(5.0, &p), 0.0);
    }

    #[test]
    fn fraction_phu_examples() {
        let p = CropParams::<f64>::default();
        assert_eq!(fraction_phu(0.0, &p), 0.0);
        assert_eq!(fraction_phu(1400.0, &p), 1.0);
        assert_eq!(fraction_phu(700.0, &p), 0.5);
        assert!(fraction_phu(2000.0, &p) > 1.0);
    }

    #[test]
    fn leaf_curve_passes_through_anchors() {
        let m = model();
        assert_abs_diff_eq!(fr_laimax(0.15, &m), 0.05, epsilon = 1e-9);
        assert_abs_diff_eq!(fr_laimax(0.50, &m), 0.95, epsilon = 1e-9);
        assert_eq!(fr_laimax(0.0, &m), 0.0);
        // independent root check: residual of the defining identity
        // fr / y - fr = exp(l1 - l2 fr) at both anchors
        let c = m.curve();
        for (x, y) in [(0.15f64, 0.05f64), (0.5, 0.95)] {
            let lhs = x / y - x;
            let rhs = (c.l1 - c.l2 * x).exp();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn lai_examples() {
        let m = model();
        // at lai_max the growth factor vanishes
        assert_eq!(lai_update(3.0, 3.0, 0.2, 0.3, &m), 3.0);
        // no heat accumulation means no growth from LAI_0 = 0
        assert_eq!(lai_update(0.0, 0.0, 0.0, 0.0, &m), 0.0);
        assert_eq!(lai_update(0.0, 0.0, 0.3, 0.3, &m), 0.0);
    }

    #[test]
    fn lai_increment_hand_value() {
        // choose fr so that K_f = 0.3 exactly: fr_laimax(fr) - fr_laimax(fr_prev) = 0.1
        let m = model();
        let fr_prev = 0.3;
        let target = fr_laimax(fr_prev, &m) + 0.1;
        let (mut lo, mut hi) = (fr_prev, 0.9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fr_laimax(mid, &m) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let next = lai_update(1.0, 1.0, fr_prev, 0.5 * (lo + hi), &m);
        assert_abs_diff_eq!(next - 1.0, 0.299986, epsilon = 1e-6);
        assert_abs_diff_eq!(next - 1.0, 0.3 * (1.0 - (-10.0f64).exp()), epsilon = 1e-9);
    }

    #[test]
    fn lai_senescence_declines_to_zero() {
        let m = model();
        let lai = lai_update(2.8, 2.9, 0.9, 0.95, &m);
        assert_abs_diff_eq!(lai, 2.9 * 0.05 / 0.1, epsilon = 1e-12);
        assert_eq!(lai_update(0.5, 2.9, 1.0, 1.1, &m), 0.0);
        // never above the previous value
        assert_eq!(lai_update(1.0, 2.9, 0.9, 0.91, &m), 1.0);
    }

    #[test]
    fn light_interception_examples() {
        let p = CropParams::<f64>::default();
        assert_eq!(light_interception(20.0, 0.0, &p), 0.0);
        assert_abs_diff_eq!(light_interception(20.0, 3.0, &p), 8.5773, epsilon = 1e-3);
        assert_abs_diff_eq!(light_interception(20.0, 50.0, &p), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn biomass_examples() {
        let p = CropParams::<f64>::default();
        assert_eq!(potential_biomass_delta(0.0, &p), 0.0);
        assert_abs_diff_eq!(potential_biomass_delta(8.5773, &p), 334.515, epsilon = 1e-3);
        assert_eq!(actual_growth(100.0, 0.0, 0.0, 0.0), 100.0);
        assert_eq!(actual_growth(100.0, 0.0, 1.0, 0.0), 0.0);
        assert_abs_diff_eq!(actual_growth(100.0, 0.2, 0.5, 0.1), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn harvest_index_examples() {
        let p = CropParams::<f64>::default();
        assert_eq!(harvest_index(0.0, &p), 0.0);
        let hi1 = 0.5 * 100.0 / (100.0 + 1.1f64.exp());
        assert_abs_diff_eq!(harvest_index(1.0, &p), hi1, epsilon = 1e-12);
        assert_abs_diff_eq!(harvest_index(1.0, &p), 0.485417, epsilon = 1e-6);
        assert_abs_diff_eq!(harvest_index(0.5, &p), 0.050417, epsilon = 1e-6);
    }

    #[test]
    fn yield_examples() {
        assert_eq!(yield_estimate(1000.0, 0.5, 0.0), 0.0);
        assert_abs_diff_eq!(root_fraction(1.0), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(yield_estimate(10000.0, 1.0, 0.485415), 3883.32, epsilon = 1e-6);
        assert_abs_diff_eq!(yield_estimate(1000.0, 1.0, 1.5), 600.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn harvest_index_below_optimum_and_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0, hi_opt in 0.01f64..=1.0) {
            let p = CropParams { hi_opt, ..CropParams::default() };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(harvest_index(hi, &p) < hi_opt);
            prop_assert!(harvest_index(lo, &p) <= harvest_index(hi, &p));
        }

        #[test]
        fn interception_bounded_and_monotone(solar in 0.0f64..40.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let p = CropParams::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let h = light_interception(solar, hi, &p);
            prop_assert!(h >= 0.0 && h <= 0.5 * solar);
            prop_assert!(light_interception(solar, lo, &p) <= h);
        }

        #[test]
        fn biomass_delta_is_linear(x in 0.0f64..50.0) {
            let p = CropParams::default();
            let one = potential_biomass_delta(x, &p);
            prop_assert!((potential_biomass_delta(2.0 * x, &p) - 2.0 * one).abs() <= 1e-9 * one.max(1.0));
        }

        #[test]
        fn leaf_curve_monotone(a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let m = model();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (ylo, yhi) = (fr_laimax(lo, &m), fr_laimax(hi, &m));
            prop_assert!(ylo <= yhi && (0.0..1.0).contains(&yhi));
        }
    }
}
