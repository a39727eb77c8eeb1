use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Linear polarization of a photon. `H < V` fixes the canonical basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Opaque spatial-mode identifier such as `1`, `2'` or `cavity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeLabel(String);

impl ModeLabel {
    pub fn new(label: impl Into<String>) -> Self {
        ModeLabel(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeLabel {
    fn from(s: &str) -> Self {
        ModeLabel(s.to_owned())
    }
}

impl From<String> for ModeLabel {
    fn from(s: String) -> Self {
        ModeLabel(s)
    }
}

impl From<&ModeLabel> for ModeLabel {
    fn from(m: &ModeLabel) -> Self {
        m.clone()
    }
}

/// Photon counts of one spatial mode, split by polarization.
///
/// Ordered by total photon number, then by V count, so `0 < H < V < HV`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Occupation {
    pub h: u32,
    pub v: u32,
}

impl Ord for Occupation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.total(), self.v).cmp(&(other.total(), other.v))
    }
}

impl PartialOrd for Occupation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Occupation {
    pub const VACUUM: Occupation = Occupation { h: 0, v: 0 };
    pub const H: Occupation = Occupation { h: 1, v: 0 };
    pub const V: Occupation = Occupation { h: 0, v: 1 };
    pub const HV: Occupation = Occupation { h: 1, v: 1 };

    pub fn new(h: u32, v: u32) -> Self {
        Occupation { h, v }
    }

    pub fn single(pol: Polarization) -> Self {
        match pol {
            Polarization::H => Occupation::H,
            Polarization::V => Occupation::V,
        }
    }

    pub fn total(self) -> u32 {
        self.h + self.v
    }

    pub fn count(self, pol: Polarization) -> u32 {
        match pol {
            Polarization::H => self.h,
            Polarization::V => self.v,
        }
    }

    /// Text form: `0` for vacuum, otherwise `H` repeated `h` times then `V` repeated `v` times.
    pub fn to_text(self) -> String {
        if self.total() == 0 {
            return "0".to_owned();
        }
        let mut s = "H".repeat(self.h as usize);
        s.push_str(&"V".repeat(self.v as usize));
        s
    }

    pub fn parse(text: &str) -> Option<Occupation> {
        if text == "0" {
            return Some(Occupation::VACUUM);
        }
        if text.is_empty() {
            return None;
        }
        let h = text.chars().take_while(|&c| c == 'H').count();
        let rest = &text[h..];
        if !rest.chars().all(|c| c == 'V') {
            return None;
        }
        Some(Occupation::new(h as u32, rest.len() as u32))
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A Fock basis element: occupation per spatial mode, modes in label order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OccupationKet(BTreeMap<ModeLabel, Occupation>);

impl OccupationKet {
    pub fn new() -> Self {
        OccupationKet(BTreeMap::new())
    }

    pub fn from_pairs<L: Into<ModeLabel>>(pairs: impl IntoIterator<Item = (L, Occupation)>) -> Self {
        OccupationKet(pairs.into_iter().map(|(l, o)| (l.into(), o)).collect())
    }

    pub fn vacuum<'a>(modes: impl IntoIterator<Item = &'a ModeLabel>) -> Self {
        OccupationKet(modes.into_iter().map(|m| (m.clone(), Occupation::VACUUM)).collect())
    }

    pub fn get(&self, mode: &ModeLabel) -> Option<Occupation> {
        self.0.get(mode).copied()
    }

    pub fn set(&mut self, mode: ModeLabel, occ: Occupation) {
        self.0.insert(mode, occ);
    }

    pub fn remove(&mut self, mode: &ModeLabel) -> Option<Occupation> {
        self.0.remove(mode)
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeLabel> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeLabel, Occupation)> {
        self.0.iter().map(|(m, o)| (m, *o))
    }

    pub fn total_photons(&self) -> u32 {
        self.0.values().map(|o| o.total()).sum()
    }

    pub fn max_occupation(&self) -> u32 {
        self.0.values().map(|o| o.h.max(o.v)).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation of two kets over disjoint mode sets.
    pub fn join(&self, other: &OccupationKet) -> OccupationKet {
        let mut out = self.0.clone();
        out.extend(other.0.iter().map(|(m, o)| (m.clone(), *o)));
        OccupationKet(out)
    }

    /// Splits into (kept, rest) by mode membership.
    pub fn split(&self, keep: &dyn Fn(&ModeLabel) -> bool) -> (OccupationKet, OccupationKet) {
        let (a, b): (BTreeMap<_, _>, BTreeMap<_, _>) =
            self.0.iter().map(|(m, o)| (m.clone(), *o)).partition(|(m, _)| keep(m));
        (OccupationKet(a), OccupationKet(b))
    }

    pub fn to_text_map(&self) -> BTreeMap<String, String> {
        self.0.iter().map(|(m, o)| (m.as_str().to_owned(), o.to_text())).collect()
    }
}

/// Photon number `n_H + n_V` of `ket` in `mode`.
pub fn photon_number(ket: &OccupationKet, mode: &ModeLabel) -> crate::Result<u32> {
    ket.get(mode)
        .map(Occupation::total)
        .ok_or_else(|| crate::Error::UnknownMode(mode.to_string()))
}

impl fmt::Display for OccupationKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("|vac>");
        }
        for (m, o) in &self.0 {
            write!(f, "|{}>_{}", o, m)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupation_text_round_trip() {
        for occ in [Occupation::VACUUM, Occupation::H, Occupation::V, Occupation::HV, Occupation::new(2, 1)] {
            assert_eq!(Occupation::parse(&occ.to_text()), Some(occ));
        }
        assert_eq!(Occupation::HV.to_text(), "HV");
        assert_eq!(Occupation::parse("VH"), None);
        assert_eq!(Occupation::parse(""), None);
    }

    #[test]
    fn photon_number_cases() {
        let ket = OccupationKet::from_pairs([("1'", Occupation::VACUUM), ("2'", Occupation::HV)]);
        assert_eq!(photon_number(&ket, &"2'".into()).unwrap(), 2);
        assert_eq!(photon_number(&ket, &"1'".into()).unwrap(), 0);
        let ket = OccupationKet::from_pairs([("1", Occupation::H), ("2", Occupation::V)]);
        assert_eq!(photon_number(&ket, &"1".into()).unwrap(), 1);
        assert!(matches!(photon_number(&ket, &"9".into()), Err(crate::Error::UnknownMode(_))));
    }

    #[test]
    fn canonical_order_is_label_then_h_before_v() {
        let a = OccupationKet::from_pairs([("1", Occupation::H)]);
        let b = OccupationKet::from_pairs([("1", Occupation::V)]);
        assert!(a < b);
        assert!(Occupation::VACUUM < Occupation::H && Occupation::V < Occupation::HV);
        assert!(Polarization::H < Polarization::V);
    }
}
