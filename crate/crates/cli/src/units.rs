//! Unit systems for emitted and ingested CSV columns.
//!
//! Configuration files are always SI. Data columns carry their unit in the
//! header suffix (`current_a`, `current_ma`), so ingestion accepts either
//! system and converts to SI.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Si,
    /// mA, ms, µm, kΩ, Ω·cm, mmol/l, µS.
    Lab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Current,
    Voltage,
    Temperature,
    Time,
    Length,
    AngularFrequency,
    Resistance,
    ResistanceLength,
    Concentration,
    Conductance,
    Plain,
}

impl Quantity {
    pub fn suffix(self, units: Units) -> &'static str {
        use Quantity::*;
        match (self, units) {
            (Current, Units::Si) => "a",
            (Current, Units::Lab) => "ma",
            (Voltage, _) => "v",
            (Temperature, _) => "k",
            (Time, Units::Si) => "s",
            (Time, Units::Lab) => "ms",
            (Length, Units::Si) => "m",
            (Length, Units::Lab) => "um",
            (AngularFrequency, _) => "rad_s",
            (Resistance, Units::Si) => "ohm",
            (Resistance, Units::Lab) => "kohm",
            (ResistanceLength, Units::Si) => "ohm_m",
            (ResistanceLength, Units::Lab) => "ohm_cm",
            (Concentration, Units::Si) => "mol_l",
            (Concentration, Units::Lab) => "mmol_l",
            (Conductance, Units::Si) => "s",
            (Conductance, Units::Lab) => "us",
            (Plain, _) => "",
        }
    }

    /// Factor from SI to the given system.
    pub fn scale(self, units: Units) -> f64 {
        use Quantity::*;
        match (self, units) {
            (_, Units::Si) => 1.0,
            (Current | Time | Concentration, Units::Lab) => 1e3,
            (Length | Conductance, Units::Lab) => 1e6,
            (Resistance, Units::Lab) => 1e-3,
            (ResistanceLength, Units::Lab) => 1e2,
            (Voltage | Temperature | AngularFrequency | Plain, Units::Lab) => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub base: &'static str,
    pub quantity: Quantity,
}

impl Column {
    pub const fn new(base: &'static str, quantity: Quantity) -> Self {
        Column { base, quantity }
    }

    pub fn header(&self, units: Units) -> String {
        match self.quantity.suffix(units) {
            "" => self.base.to_string(),
            s => format!("{}_{s}", self.base),
        }
    }
}
