use thiserror::Error;

use crate::num::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("leaf-development anchors ({x1}, {y1}) and ({x2}, {y2}) do not determine an S-curve")]
    SingularLaiCurve { x1: f64, y1: f64, x2: f64, y2: f64 },
}

fn check<T: Scalar>(
    name: &'static str,
    value: T,
    ok: bool,
    reason: &'static str,
) -> Result<(), ParamError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::Invalid {
            name,
            value: value.as_f64(),
            reason,
        })
    }
}

/// Corn growth parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropParams<T> {
    /// Base temperature for growth, °C.
    pub t_base: T,
    /// Optimal temperature for growth, °C.
    pub t_opt: T,
    pub lai_max: T,
    /// Fraction of potential heat units at which leaf senescence begins.
    pub fr_phu_sen: T,
    /// Potential heat units to maturity, °C·day.
    pub phu_total: T,
    /// Radiation use efficiency, (kg/ha)/(MJ/m²).
    pub rue: T,
    /// Light extinction coefficient.
    pub k_l: T,
    /// Potential harvest index at maturity.
    pub hi_opt: T,
    /// `(fr_phu, fraction of lai_max)` anchors of the leaf-development curve.
    pub lai_curve_pt1: (T, T),
    pub lai_curve_pt2: (T, T),
}

impl<T: Scalar> Default for CropParams<T> {
    fn default() -> Self {
        Self {
            t_base: T::lit(8.0),
            t_opt: T::lit(25.0),
            lai_max: T::lit(3.0),
            fr_phu_sen: T::lit(0.9),
            phu_total: T::lit(1400.0),
            rue: T::lit(39.0),
            k_l: T::lit(0.65),
            hi_opt: T::lit(0.5),
            lai_curve_pt1: (T::lit(0.15), T::lit(0.05)),
            lai_curve_pt2: (T::lit(0.50), T::lit(0.95)),
        }
    }
}

impl<T: Scalar> CropParams<T> {
    pub fn validate(&self) -> Result<(), ParamError> {
        let zero = T::zero();
        let one = T::one();
        check("t_base", self.t_base, true, "must be finite")?;
        check("t_opt", self.t_opt, self.t_opt > self.t_base, "must exceed t_base")?;
        check("lai_max", self.lai_max, self.lai_max > zero, "must be positive")?;
        check(
            "fr_phu_sen",
            self.fr_phu_sen,
            self.fr_phu_sen > zero && self.fr_phu_sen <= one,
            "must lie in (0, 1]",
        )?;
        check("phu_total", self.phu_total, self.phu_total > zero, "must be positive")?;
        check("rue", self.rue, self.rue > zero, "must be positive")?;
        check("k_l", self.k_l, self.k_l > zero, "must be positive")?;
        check(
            "hi_opt",
            self.hi_opt,
            self.hi_opt > zero && self.hi_opt <= one,
            "must lie in (0, 1]",
        )?;
        let (x1, y1) = self.lai_curve_pt1;
        let (x2, y2) = self.lai_curve_pt2;
        check("lai_curve_pt1.fr_phu", x1, x1 > zero, "must be positive")?;
        check("lai_curve_pt1.fr_lai", y1, y1 > zero && y1 < one, "must lie in (0, 1)")?;
        check("lai_curve_pt2.fr_phu", x2, x2 > x1, "must exceed the first anchor")?;
        check(
            "lai_curve_pt2.fr_lai",
            y2,
            y2 > y1 && y2 < one,
            "must exceed the first anchor and stay below 1",
        )?;
        Ok(())
    }
}

/// Soil water, runoff and nitrogen parameters for a homogeneous profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilParams<T> {
    /// Plant-available water capacity, mm.
    pub sw_capacity: T,
    /// Initial soil water, mm.
    pub sw_init: T,
    /// Curve number for average moisture (condition II).
    pub cn2: T,
    /// Initial soil nitrate, kg/ha.
    pub n_init: T,
    /// First-order denitrification rate, 1/day.
    pub denit_rate: T,
    /// Fraction of capacity above which denitrification runs.
    pub denit_sw_threshold: T,
    /// Nitrogen demand per unit biomass growth, kg N/kg.
    pub n_uptake_coeff: T,
}

impl<T: Scalar> Default for SoilParams<T> {
    fn default() -> Self {
        Self {
            sw_capacity: T::lit(100.0),
            sw_init: T::lit(40.0),
            cn2: T::lit(78.0),
            n_init: T::lit(50.0),
            denit_rate: T::lit(0.02),
            denit_sw_threshold: T::lit(0.9),
            n_uptake_coeff: T::lit(0.015),
        }
    }
}

impl<T: Scalar> SoilParams<T> {
    pub fn validate(&self) -> Result<(), ParamError> {
        let zero = T::zero();
        let one = T::one();
        check("sw_capacity", self.sw_capacity, self.sw_capacity > zero, "must be positive")?;
        check(
            "sw_init",
            self.sw_init,
            self.sw_init >= zero && self.sw_init <= self.sw_capacity,
            "must lie in [0, sw_capacity]",
        )?;
        check(
            "cn2",
            self.cn2,
            self.cn2 > T::lit(30.0) && self.cn2 <= T::lit(100.0),
            "must lie in (30, 100]",
        )?;
        check("n_init", self.n_init, self.n_init >= zero, "must be non-negative")?;
        check(
            "denit_rate",
            self.denit_rate,
            self.denit_rate >= zero && self.denit_rate <= one,
            "must lie in [0, 1]",
        )?;
        check(
            "denit_sw_threshold",
            self.denit_sw_threshold,
            self.denit_sw_threshold >= zero && self.denit_sw_threshold <= one,
            "must lie in [0, 1]",
        )?;
        check(
            "n_uptake_coeff",
            self.n_uptake_coeff,
            self.n_uptake_coeff >= zero,
            "must be non-negative",
        )?;
        Ok(())
    }
}

/// Leaf-development S-curve `fr / (fr + exp(l1 - l2 fr))` through two anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaiCurve<T> {
    pub l1: T,
    pub l2: T,
}

impl<T: Scalar> LaiCurve<T> {
    /// Solves the shape coefficients from two `(fr_phu, fraction)` anchors.
    pub fn fit(p1: (T, T), p2: (T, T)) -> Result<Self, ParamError> {
        let (x1, y1) = p1;
        let (x2, y2) = p2;
        let singular = || ParamError::SingularLaiCurve {
            x1: x1.as_f64(),
            y1: y1.as_f64(),
            x2: x2.as_f64(),
            y2: y2.as_f64(),
        };
        let one = T::one();
        if !(x1 > T::zero() && x2 > T::zero() && y1 > T::zero() && y2 > T::zero())
            || !(y1 < one && y2 < one)
            || x1 == x2
        {
            return Err(singular());
        }
        // l1 - l2 x = ln(x / y - x) at each anchor
        let g1 = (x1 / y1 - x1).ln();
        let g2 = (x2 / y2 - x2).ln();
        let l2 = (g1 - g2) / (x2 - x1);
        let l1 = g1 + l2 * x1;
        if !l1.is_finite() || !l2.is_finite() {
            return Err(singular());
        }
        Ok(Self { l1, l2 })
    }

    pub fn eval(&self, fr_phu: T) -> T {
        if fr_phu <= T::zero() {
            return T::zero();
        }
        fr_phu / (fr_phu + (self.l1 - self.l2 * fr_phu).exp())
    }
}

/// Validated crop parameters together with the fitted leaf curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropModel<T> {
    params: CropParams<T>,
    curve: LaiCurve<T>,
}

impl<T: Scalar> CropModel<T> {
    pub fn new(params: CropParams<T>) -> Result<Self, ParamError> {
        params.validate()?;
        let curve = LaiCurve::fit(params.lai_curve_pt1, params.lai_curve_pt2)?;
        Ok(Self { params, curve })
    }

    pub fn params(&self) -> &CropParams<T> {
        &self.params
    }

    pub fn curve(&self) -> &LaiCurve<T> {
        &self.curve
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(CropParams::<f64>::default().validate().is_ok());
        assert!(SoilParams::<f64>::default().validate().is_ok());
        assert!(CropModel::new(CropParams::<f32>::default()).is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let p = CropParams::<f64> {
            t_opt: 5.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(ParamError::Invalid { name: "t_opt", .. })));
        let s = SoilParams::<f64> {
            sw_init: 200.0,
            ..Default::default()
        };
        assert!(matches!(s.validate(), Err(ParamError::Invalid { name: "sw_init", .. })));
        let s = SoilParams::<f64> {
            cn2: 30.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn coincident_anchors_are_singular() {
        assert!(matches!(
            LaiCurve::fit((0.3, 0.2), (0.3, 0.6)),
            Err(ParamError::SingularLaiCurve { .. })
        ));
        assert!(LaiCurve::<f64>::fit((0.3, 0.2), (0.5, 1.0)).is_err());
    }
}
