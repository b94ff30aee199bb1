//! Channel profiles, prediction constants and experiment plans shipped with the crate.

use crate::error::{Error, Result};
use crate::ggd::ConstellationProfile;
use crate::predict::PredictionModel;

macro_rules! profiles {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/profiles/", $name, ".json")))),*]
    };
}

static PROFILES: &[(&str, &str)] = profiles!(
    "table2_a",
    "table2_b",
    "table2_c",
    "table2_d",
    "table2_e",
    "table2_f",
    "table2_g",
    "table2_h",
    "table2_i",
    "table2_j",
    "table2_k",
    "table2_l",
    "table2_m",
    "table2_n",
    "table2_o",
    "table2_p",
    "table4_ns1",
    "table4_ns2",
    "table4_ns3",
    "table4_ns4",
    "table4_ns5",
    "table4_ns6",
    "table4_ns7",
    "table4_ns8",
    "sps_default",
    "sps_mobile",
);

static PLANS: &[(&str, &str)] = &[
    ("table6", include_str!("../data/plans/table6.toml")),
    ("fig17", include_str!("../data/plans/fig17.toml")),
    ("appendixA", include_str!("../data/plans/appendixA.toml")),
];

static FIG15_X2: &str = include_str!("../data/models/fig15_x2.json");

pub fn profile_names() -> Vec<&'static str> {
    PROFILES.iter().map(|p| p.0).collect()
}

pub fn profile(name: &str) -> Result<ConstellationProfile<f64>> {
    let (_, json) = PROFILES
        .iter()
        .find(|p| p.0 == name)
        .ok_or_else(|| Error::MissingProfile(format!("no bundled profile {name}")))?;
    ConstellationProfile::from_json(json)
}

/// Copy-channel profile for device combination `label` in 'a'..='p'.
pub fn table2(label: char) -> Result<ConstellationProfile<f64>> {
    profile(&format!("table2_{label}"))
}

/// Synthesized-copy profiles for n_s = 1..8.
pub fn table4_series() -> Result<Vec<(usize, ConstellationProfile<f64>)>> {
    (1..=8).map(|n| Ok((n, profile(&format!("table4_ns{n}"))?))).collect()
}

/// Published prediction constants (gray-100 point only).
pub fn fig15_constants() -> Result<PredictionModel> {
    let m: PredictionModel = serde_json::from_str(FIG15_X2)?;
    m.validate()?;
    Ok(m)
}

pub fn plan_names() -> Vec<&'static str> {
    PLANS.iter().map(|p| p.0).collect()
}

pub fn plan_source(name: &str) -> Result<&'static str> {
    PLANS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| Error::MissingProfile(format!("no bundled plan {name}")))
}
