use super::growth::{
    actual_growth, fraction_phu, harvest_index, heat_units, lai_update, light_interception,
    potential_biomass_delta, yield_estimate,
};
use super::params::{CropModel, SoilParams};
use super::soil::{
    actual_et, available_water, nitrogen_update, potential_et, soil_water_update, surface_runoff,
    update_curve_number,
};
use super::stress::{nitrogen_stress, temperature_stress, water_stress};
use crate::environment::Action;
use crate::num::Scalar;
use crate::weather::WeatherDay;

/// Plant state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CropState<T> {
    /// Accumulated heat units, °C·day.
    pub hu_cum: T,
    pub fr_phu: T,
    pub lai: T,
    /// Highest leaf area index reached so far; anchors senescence.
    pub lai_peak: T,
    /// Cumulative total biomass, kg/ha.
    pub biomass: T,
    /// Actual evapotranspiration on the last day, mm.
    pub e_a: T,
    pub n_strs: T,
    pub w_strs: T,
    pub t_strs: T,
    /// Estimated yield to date, kg/ha.
    pub yld: T,
}

impl<T: Scalar> CropState<T> {
    /// State at emergence: no leaf area, no biomass.
    pub fn initial() -> Self {
        Self {
            hu_cum: T::zero(),
            fr_phu: T::zero(),
            lai: T::zero(),
            lai_peak: T::zero(),
            biomass: T::zero(),
            e_a: T::zero(),
            n_strs: T::zero(),
            w_strs: T::zero(),
            t_strs: T::zero(),
            yld: T::zero(),
        }
    }
}

/// Soil state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SoilState<T> {
    /// Soil water, mm.
    pub sw: T,
    /// Runoff curve number for the coming day.
    pub rcn: T,
    /// Denitrification on the last day, kg/ha.
    pub dn: T,
    /// Nitrogen uptake on the last day, kg/ha.
    pub n_up: T,
    /// Soil nitrate, kg/ha.
    pub n_pool: T,
    /// Cumulative precipitation + irrigation - runoff - evapotranspiration, mm.
    pub wb_cum: T,
}

impl<T: Scalar> SoilState<T> {
    pub fn initial(sp: &SoilParams<T>) -> Self {
        Self {
            sw: sp.sw_init,
            rcn: update_curve_number(sp.cn2, sp.sw_init, sp.sw_capacity),
            dn: T::zero(),
            n_up: T::zero(),
            n_pool: sp.n_init,
            wb_cum: T::zero(),
        }
    }
}

/// Everything produced by one simulated day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayOutcome<T> {
    pub crop: CropState<T>,
    pub soil: SoilState<T>,
    /// Increase in estimated yield, kg/ha, never negative.
    pub yld_delta: T,
    /// Surface runoff, mm.
    pub runoff: T,
    /// Water above capacity, mm.
    pub overflow: T,
    /// Intercepted photosynthetically active radiation, MJ/m².
    pub h_phosyn: T,
    pub delta_bio_potential: T,
    pub delta_bio: T,
}

/// Advances plant and soil state by one day.
///
/// Order: heat units, fraction of PHU, runoff on rain plus irrigation (with
/// the previous curve number), actual ET, soil water, nitrogen (demand from
/// potential growth), stresses, leaf area, actual biomass, harvest index,
/// yield. Leaf area and interception use the previous day's canopy.
pub fn step_dynamics<T: Scalar>(
    crop: &CropState<T>,
    soil: &SoilState<T>,
    w: &WeatherDay<T>,
    a: &Action<T>,
    model: &CropModel<T>,
    sp: &SoilParams<T>,
) -> DayOutcome<T> {
    let cp = model.params();

    let hu_cum = crop.hu_cum + heat_units(w.t_mean, cp);
    let fr_phu = fraction_phu(hu_cum, cp);

    let water_in = w.precip + a.irrig;
    let runoff = surface_runoff(water_in, soil.rcn);
    let avail = available_water(soil.sw, w.precip, a.irrig, runoff);
    let e_a = actual_et(w.ref_et, crop.lai, avail, sp);
    let e_pot = potential_et(w.ref_et, crop.lai);
    let water = soil_water_update(soil.sw, w.precip, a.irrig, runoff, e_a, sp);
    let rcn = update_curve_number(sp.cn2, water.sw, sp.sw_capacity);

    let h_phosyn = light_interception(w.solar, crop.lai, cp);
    let delta_bio_potential = potential_biomass_delta(h_phosyn, cp);
    let nitrogen = nitrogen_update(soil.n_pool, a.fert, delta_bio_potential, water.sw, sp);

    let n_strs = nitrogen_stress(nitrogen.n_up, nitrogen.demand);
    let w_strs = water_stress(e_a, e_pot);
    let t_strs = temperature_stress(w.t_mean, cp);

    let lai = lai_update(crop.lai, crop.lai_peak, crop.fr_phu, fr_phu, model);
    let delta_bio = actual_growth(delta_bio_potential, n_strs, w_strs, t_strs);
    let biomass = crop.biomass + delta_bio;

    let hi = harvest_index(fr_phu, cp);
    let yld = yield_estimate(biomass, fr_phu, hi).max(crop.yld);
    let yld_delta = yld - crop.yld;

    DayOutcome {
        crop: CropState {
            hu_cum,
            fr_phu,
            lai,
            lai_peak: crop.lai_peak.max(lai),
            biomass,
            e_a,
            n_strs,
            w_strs,
            t_strs,
            yld,
        },
        soil: SoilState {
            sw: water.sw,
            rcn,
            dn: nitrogen.dn,
            n_up: nitrogen.n_up,
            n_pool: nitrogen.n_pool,
            wb_cum: soil.wb_cum + (water_in - runoff - e_a),
        },
        yld_delta,
        runoff,
        overflow: water.overflow,
        h_phosyn,
        delta_bio_potential,
        delta_bio,
    }
}
