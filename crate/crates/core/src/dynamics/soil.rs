//! Surface runoff, evapotranspiration, soil water and nitrate bookkeeping.

use super::params::SoilParams;
use crate::num::Scalar;

/// Bare-soil evaporation share added to canopy cover in [`actual_et`].
pub const SOIL_EVAP_SHARE: f64 = 0.1;

/// SCS curve-number runoff, mm.
pub fn surface_runoff<T: Scalar>(water_in: T, rcn: T) -> T {
    let s = T::lit(25.4) * (T::lit(1000.0) / rcn - T::lit(10.0));
    let ia = T::lit(0.2) * s;
    if water_in <= ia {
        return T::zero();
    }
    let excess = water_in - ia;
    let q = excess * excess / (water_in + T::lit(0.8) * s);
    q.clamp_to(T::zero(), water_in)
}

/// Moisture-adjusted curve number: linear from `cn2 - 15` when dry to
/// `min(99, cn2 + 10)` at capacity.
pub fn update_curve_number<T: Scalar>(cn2: T, sw: T, sw_capacity: T) -> T {
    let dry = (cn2 - T::lit(15.0)).max(T::lit(31.0));
    let wet = (cn2 + T::lit(10.0)).min(T::lit(99.0)).max(dry);
    let frac = (sw / sw_capacity).clamp_to(T::zero(), T::one());
    dry + (wet - dry) * frac
}

fn canopy_factor<T: Scalar>(lai: T) -> T {
    (T::one() - (T::lit(-0.5) * lai).exp() + T::lit(SOIL_EVAP_SHARE)).min(T::one())
}

/// Evapotranspiration demand of the crop surface with unlimited water, mm.
pub fn potential_et<T: Scalar>(ref_et: T, lai: T) -> T {
    (ref_et * canopy_factor(lai)).max(T::zero())
}

/// Water-limited evapotranspiration, mm, capped at `min(ref_et, sw)`.
pub fn actual_et<T: Scalar>(ref_et: T, lai: T, sw: T, sp: &SoilParams<T>) -> T {
    let water = (sw / (T::lit(0.5) * sp.sw_capacity)).min(T::one());
    let e = potential_et(ref_et, lai) * water;
    e.min(ref_et).min(sw).max(T::zero())
}

/// Result of the daily water balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterUpdate<T> {
    pub sw: T,
    /// Water above capacity, mm. Reported but not routed.
    pub overflow: T,
}

/// Water left in the profile after infiltration, before evapotranspiration.
pub fn available_water<T: Scalar>(sw: T, precip: T, irrig: T, q: T) -> T {
    sw + precip + irrig - q
}

/// Daily soil water balance without percolation or lateral flow.
pub fn soil_water_update<T: Scalar>(
    sw: T,
    precip: T,
    irrig: T,
    q: T,
    e_a: T,
    sp: &SoilParams<T>,
) -> WaterUpdate<T> {
    let raw = available_water(sw, precip, irrig, q) - e_a;
    debug_assert!(raw >= T::zero(), "evapotranspiration exceeds available water");
    let raw = raw.max(T::zero());
    let next = raw.min(sp.sw_capacity);
    WaterUpdate {
        sw: next,
        overflow: raw - next,
    }
}

/// Result of the daily nitrate balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NitrogenUpdate<T> {
    pub n_pool: T,
    pub n_up: T,
    pub dn: T,
    pub demand: T,
}

/// Uptake driven by biomass growth, then first-order denitrification of the
/// remainder when the soil is wetter than the threshold.
pub fn nitrogen_update<T: Scalar>(
    n_pool: T,
    fert: T,
    delta_bio: T,
    sw: T,
    sp: &SoilParams<T>,
) -> NitrogenUpdate<T> {
    let demand = sp.n_uptake_coeff * delta_bio;
    let available = n_pool + fert;
    let n_up = demand.min(available).max(T::zero());
    let remaining = available - n_up;
    let dn = if sw > sp.denit_sw_threshold * sp.sw_capacity {
        sp.denit_rate * remaining
    } else {
        T::zero()
    };
    NitrogenUpdate {
        n_pool: (remaining - dn).max(T::zero()),
        n_up,
        dn,
        demand,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn runoff_examples() {
        assert_abs_diff_eq!(surface_runoff(37.0, 100.0), 37.0, epsilon = 1e-12);
        let s = 25.4 * (1000.0 / 80.0 - 10.0);
        assert_eq!(surface_runoff(0.2 * s, 80.0), 0.0);
        assert_eq!(surface_runoff(5.0, 80.0), 0.0);
        assert_abs_diff_eq!(surface_runoff(50.0, 80.0), 13.8025, epsilon = 1e-3);
    }

    #[test]
    fn curve_number_examples() {
        assert_eq!(update_curve_number(80.0, 0.0, 100.0), 65.0);
        assert_eq!(update_curve_number(95.0, 100.0, 100.0), 99.0);
        let mid = update_curve_number(80.0, 50.0, 100.0);
        assert!(mid > 65.0 && mid < 90.0);
        assert!(update_curve_number(80.0, 40.0, 100.0) < update_curve_number(80.0, 60.0, 100.0));
    }

    #[test]
    fn et_examples() {
        let sp = SoilParams::<f64>::default();
        assert_eq!(actual_et(5.0, 2.0, 0.0, &sp), 0.0);
        assert_eq!(actual_et(0.0, 2.0, 80.0, &sp), 0.0);
        // bare soil still evaporates
        assert!(actual_et(5.0, 0.0, 80.0, &sp) > 0.0);
    }

    #[test]
    fn water_examples() {
        let sp = SoilParams::<f64>::default();
        let u = soil_water_update(50.0, 0.0, 0.0, 0.0, 0.0, &sp);
        assert_eq!(u.sw, 50.0);
        let u = soil_water_update(100.0, 12.0, 8.0, 0.0, 0.0, &sp);
        assert_eq!((u.sw, u.overflow), (100.0, 20.0));
        let u = soil_water_update(50.0, 15.0, 5.0, 5.0, 3.0, &sp);
        assert_abs_diff_eq!(u.sw, 62.0, epsilon = 1e-12);
    }

    #[test]
    fn nitrogen_examples() {
        let sp = SoilParams::<f64>::default();
        let u = nitrogen_update(40.0, 0.0, 0.0, 10.0, &sp);
        assert_eq!((u.n_pool, u.n_up, u.dn), (40.0, 0.0, 0.0));

        let u = nitrogen_update(5.0, 1.0, 1000.0, 10.0, &sp);
        assert_eq!((u.n_up, u.n_pool), (6.0, 0.0));

        let wet = SoilParams {
            n_uptake_coeff: 0.01,
            ..sp
        };
        // demand 20 from 2000 kg/ha of growth
        let u = nitrogen_update(100.0, 10.0, 2000.0, 95.0, &wet);
        assert_abs_diff_eq!(u.n_up, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.dn, 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(u.n_pool, 88.2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn runoff_bounded(w in 0.0f64..300.0, cn in 30.01f64..=100.0) {
            let q = surface_runoff(w, cn);
            prop_assert!(q >= 0.0 && q <= w);
        }

        #[test]
        fn curve_number_in_range(cn2 in 30.01f64..=100.0, f in 0.0f64..=1.0) {
            let cn = update_curve_number(cn2, f * 100.0, 100.0);
            prop_assert!(cn > 30.0 && cn <= 100.0);
        }

        #[test]
        fn actual_et_monotone(
            ref_et in 0.0f64..12.0, lai in 0.0f64..3.0, sw in 0.0f64..150.0,
            d_ref in 0.0f64..3.0, d_lai in 0.0f64..1.0, d_sw in 0.0f64..20.0,
        ) {
            let sp = SoilParams::default();
            let base = actual_et(ref_et, lai, sw, &sp);
            prop_assert!(base >= 0.0 && base <= ref_et.min(sw) + 1e-12);
            prop_assert!(actual_et(ref_et + d_ref, lai, sw, &sp) >= base);
            prop_assert!(actual_et(ref_et, lai + d_lai, sw, &sp) >= base);
            prop_assert!(actual_et(ref_et, lai, sw + d_sw, &sp) >= base);
        }

        #[test]
        fn water_and_nitrogen_close(
            sw in 0.0f64..=100.0, p in 0.0f64..80.0, irr in 0.0f64..50.0,
            ref_et in 0.0f64..10.0, lai in 0.0f64..3.0, cn in 31.0f64..=99.0,
            pool in 0.0f64..300.0, fert in 0.0f64..50.0, bio in 0.0f64..600.0,
        ) {
            let sp = SoilParams::default();
            let q = surface_runoff(p + irr, cn);
            let e = actual_et(ref_et, lai, available_water(sw, p, irr, q), &sp);
            let u = soil_water_update(sw, p, irr, q, e, &sp);
            prop_assert!(u.sw >= 0.0 && u.sw <= sp.sw_capacity);
            prop_assert!((u.sw + u.overflow - sw - (p + irr - q - e)).abs() <= 1e-9);
            let n = nitrogen_update(pool, fert, bio, u.sw, &sp);
            prop_assert!(n.n_pool >= 0.0);
            prop_assert!((n.n_pool + n.n_up + n.dn - pool - fert).abs() <= 1e-9);
        }
    }
}
