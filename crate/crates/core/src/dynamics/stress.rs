//! Growth-limiting stress factors: 0 means no stress, 1 means growth stops.

use super::params::CropParams;
use crate::num::Scalar;

/// Temperature stress with kill points at `t_base` and `2 t_opt - t_base`.
pub fn temperature_stress<T: Scalar>(t_mean: T, p: &CropParams<T>) -> T {
    let upper = T::lit(2.0) * p.t_opt - p.t_base;
    if !(t_mean > p.t_base) || t_mean >= upper {
        return T::one();
    }
    let far = if t_mean <= p.t_opt {
        t_mean - p.t_base
    } else {
        upper - t_mean
    };
    let d = p.t_opt - t_mean;
    let s = T::one() - (T::lit(-0.1054) * d * d / (far * far)).exp();
    s.clamp_to(T::zero(), T::one())
}

/// `1 - min(1, e_a / e_ref)`, zero when there is no demand.
pub fn water_stress<T: Scalar>(e_a: T, e_ref: T) -> T {
    if e_ref <= T::zero() {
        return T::zero();
    }
    T::one() - (e_a / e_ref).min(T::one()).max(T::zero())
}

/// `1 - min(1, supplied / demand)`, zero when there is no demand.
pub fn nitrogen_stress<T: Scalar>(n_supplied: T, n_demand: T) -> T {
    if n_demand <= T::zero() {
        return T::zero();
    }
    T::one() - (n_supplied / n_demand).min(T::one()).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn temperature_examples() {
        let p = CropParams::<f64>::default();
        assert_eq!(temperature_stress(25.0, &p), 0.0);
        assert_eq!(temperature_stress(8.0, &p), 1.0);
        assert_eq!(temperature_stress(-5.0, &p), 1.0);
        assert_eq!(temperature_stress(42.0, &p), 1.0);
        assert_abs_diff_eq!(temperature_stress(20.0, &p), 0.01813, epsilon = 1e-5);
        // symmetric about t_opt
        assert_abs_diff_eq!(
            temperature_stress(20.0, &p),
            temperature_stress(30.0, &p),
            epsilon = 1e-12
        );
    }

    #[test]
    fn water_examples() {
        assert_eq!(water_stress(4.0, 4.0), 0.0);
        assert_eq!(water_stress(0.0, 4.0), 1.0);
        assert_eq!(water_stress(2.0, 4.0), 0.5);
        assert_eq!(water_stress(0.0, 0.0), 0.0);
    }

    #[test]
    fn nitrogen_examples() {
        assert_eq!(nitrogen_stress(5.0, 4.0), 0.0);
        assert_eq!(nitrogen_stress(0.0, 4.0), 1.0);
        assert_eq!(nitrogen_stress(3.0, 4.0), 0.25);
    }

    proptest! {
        #[test]
        fn stresses_in_unit_interval(t in -60.0f64..60.0, a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let p = CropParams::default();
            for s in [temperature_stress(t, &p), water_stress(a, b), nitrogen_stress(a, b)] {
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }
}
