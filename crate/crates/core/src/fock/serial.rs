//! Canonical JSON form of states: a list of `{ket, re, im}` terms in basis order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::density::DensityMatrix;
use super::ket::{ModeLabel, Occupation, OccupationKet};
use super::state::PureState;
use crate::{Error, Result};

/// One amplitude of a serialized pure state. `ket` maps mode label to `0`, `H`, `V`, `HV`, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTerm {
    pub ket: BTreeMap<String, String>,
    pub re: f64,
    pub im: f64,
}

/// One entry of a serialized density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEntry {
    pub row: BTreeMap<String, String>,
    pub col: BTreeMap<String, String>,
    pub re: f64,
    pub im: f64,
}

fn parse_ket(map: &BTreeMap<String, String>) -> Result<OccupationKet> {
    let mut ket = OccupationKet::new();
    for (m, o) in map {
        let occ = Occupation::parse(o)
            .ok_or_else(|| Error::InvalidArgument(format!("bad occupation '{o}' for mode '{m}'")))?;
        ket.set(ModeLabel::new(m.clone()), occ);
    }
    Ok(ket)
}

impl PureState {
    pub fn to_terms(&self) -> Vec<StateTerm> {
        self.terms()
            .map(|(k, a)| StateTerm { ket: k.to_text_map(), re: a.re, im: a.im })
            .collect()
    }

    /// Inverse of [`PureState::to_terms`]. An empty list decodes to the zero state on no modes.
    pub fn from_state_terms(terms: &[StateTerm]) -> Result<PureState> {
        let kets = terms.iter().map(|t| parse_ket(&t.ket)).collect::<Result<Vec<_>>>()?;
        let modes: Vec<ModeLabel> = kets.first().map(|k| k.modes().cloned().collect()).unwrap_or_default();
        let n_max = kets.iter().map(|k| k.max_occupation()).max().unwrap_or(0);
        let n_max = n_max.max(crate::tol::DEFAULT_N_MAX);
        let amps = kets.into_iter().zip(terms).map(|(k, t)| (k, Complex64::new(t.re, t.im)));
        PureState::from_terms_with_cap(modes, amps, n_max)
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_terms().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<StateTerm>::deserialize(deserializer)?;
        PureState::from_state_terms(&terms).map_err(serde::de::Error::custom)
    }
}

impl DensityMatrix {
    pub fn to_entries(&self) -> Vec<DensityEntry> {
        self.entries()
            .map(|(a, b, v)| DensityEntry { row: a.to_text_map(), col: b.to_text_map(), re: v.re, im: v.im })
            .collect()
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_entries().serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SourceSpec;

    #[test]
    fn canonical_json_shape() {
        let s = PureState::single_photon("2'", &SourceSpec::horizontal())
            .unwrap()
            .tensor(&PureState::single_photon("1", &SourceSpec::vertical()).unwrap())
            .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[{"ket":{"1":"V","2'":"H"},"re":1.0,"im":0.0}]"#);
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_occupation_rejected() {
        let r: std::result::Result<PureState, _> = serde_json::from_str(r#"[{"ket":{"1":"X"},"re":1.0,"im":0.0}]"#);
        assert!(r.is_err());
    }
}
