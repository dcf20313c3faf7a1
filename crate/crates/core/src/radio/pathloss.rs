use std::f64::consts::PI;

use super::RadioError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Los,
    Nlos,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Los => "los",
            Regime::Nlos => "nlos",
        }
    }
}

/// Shape of the distance-dependent correction added to the LoS base term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CModel {
    /// C(d) = 0 (plus offset).
    Zero,
    /// Two-slope lower bound around the breakpoint distance:
    /// 20·log10(d/R_bp) inside, 40·log10(d/R_bp) beyond.
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LosParams {
    pub wavelength_m: f64,
    pub h_bs_m: f64,
    pub h_uav_m: f64,
    pub c_model: CModel,
    pub c_offset_db: f64,
}

impl LosParams {
    pub fn breakpoint_m(&self) -> f64 {
        4.0 * self.h_bs_m * self.h_uav_m / self.wavelength_m
    }

    fn validate(&self) -> Result<(), RadioError> {
        for (name, v) in [
            ("wavelength", self.wavelength_m),
            ("h_bs", self.h_bs_m),
            ("h_uav", self.h_uav_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RadioError::Geometry { what: name, value: v });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NlosParams {
    pub frequency_hz: f64,
    /// Diffraction slope, dB per decade of distance.
    pub diffraction_coeff_db: f64,
    pub diffraction_floor_db: f64,
}

impl NlosParams {
    /// Diffraction term; never negative.
    pub fn diffraction_db(&self, d: f64) -> f64 {
        (self.diffraction_floor_db + self.diffraction_coeff_db * d.max(1.0).log10()).max(0.0)
    }
}

/// Loss split into its additive terms; `total_db` is always their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathlossBreakdown {
    pub total_db: f64,
    pub basic_db: f64,
    pub wall_db: f64,
    pub altitude_gain_db: f64,
    pub regime: Regime,
}

impl PathlossBreakdown {
    pub fn new(basic_db: f64, wall_db: f64, altitude_gain_db: f64, regime: Regime) -> Self {
        PathlossBreakdown {
            total_db: basic_db + wall_db + altitude_gain_db,
            basic_db,
            wall_db,
            altitude_gain_db,
            regime,
        }
    }
}

fn check_distance(d: f64) -> Result<(), RadioError> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(RadioError::Geometry {
            what: "distance",
            value: d,
        })
    }
}

pub fn c_term_db(p: &LosParams, d: f64) -> f64 {
    let shape = match p.c_model {
        CModel::Zero => 0.0,
        CModel::LowerBound => {
            let ratio = d / p.breakpoint_m();
            if ratio <= 1.0 {
                20.0 * ratio.log10()
            } else {
                40.0 * ratio.log10()
            }
        }
    };
    shape + p.c_offset_db
}

/// Line-of-sight basic loss: |20·log10(λ²/(8π·h_bs·h_uav))| + C(d).
pub fn pathloss_los(p: &LosParams, d: f64) -> Result<f64, RadioError> {
    p.validate()?;
    check_distance(d)?;
    let ratio = p.wavelength_m.powi(2) / (8.0 * PI * p.h_bs_m * p.h_uav_m);
    Ok((20.0 * ratio.log10()).abs() + c_term_db(p, d))
}

pub fn free_space_db(d: f64, frequency_hz: f64) -> f64 {
    20.0 * d.log10() + 20.0 * frequency_hz.log10() - 147.55
}

/// Non-line-of-sight basic loss: free-space plus diffraction.
pub fn pathloss_nlos(p: &NlosParams, d: f64) -> Result<f64, RadioError> {
    check_distance(d)?;
    if !(p.frequency_hz > 0.0 && p.frequency_hz.is_finite()) {
        return Err(RadioError::Geometry {
            what: "frequency",
            value: p.frequency_hz,
        });
    }
    if p.diffraction_coeff_db < 0.0 {
        return Err(RadioError::Geometry {
            what: "diffraction_coeff",
            value: p.diffraction_coeff_db,
        });
    }
    Ok(free_space_db(d, p.frequency_hz) + p.diffraction_db(d))
}

/// Full urban loss model: regime switch, wall loss, altitude gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathlossModel {
    pub regime: Regime,
    pub c_model: CModel,
    pub c_offset_db: f64,
    pub diffraction_coeff_db: f64,
    pub diffraction_floor_db: f64,
    pub wall_loss_db: f64,
    /// Gain per metre of height above the base station (negative reduces loss).
    pub altitude_gain_db_per_m: f64,
    /// Most negative allowed altitude gain.
    pub altitude_gain_cap_db: f64,
}

impl PathlossModel {
    pub fn altitude_gain_db(&self, height_above_bs_m: f64) -> f64 {
        (self.altitude_gain_db_per_m * height_above_bs_m.max(0.0)).max(self.altitude_gain_cap_db)
    }

    pub fn breakdown(
        &self,
        d: f64,
        frequency_hz: f64,
        h_bs_m: f64,
        h_mobile_m: f64,
    ) -> Result<PathlossBreakdown, RadioError> {
        let basic = match self.regime {
            Regime::Los => pathloss_los(
                &LosParams {
                    wavelength_m: SPEED_OF_LIGHT / frequency_hz,
                    h_bs_m,
                    h_uav_m: h_mobile_m,
                    c_model: self.c_model,
                    c_offset_db: self.c_offset_db,
                },
                d,
            )?,
            Regime::Nlos => pathloss_nlos(
                &NlosParams {
                    frequency_hz,
                    diffraction_coeff_db: self.diffraction_coeff_db,
                    diffraction_floor_db: self.diffraction_floor_db,
                },
                d,
            )?,
        };
        Ok(PathlossBreakdown::new(
            basic.max(0.0),
            self.wall_loss_db,
            self.altitude_gain_db(h_mobile_m - h_bs_m),
            self.regime,
        ))
    }
}
