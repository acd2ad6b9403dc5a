//! Bit strings and truth-table NP relations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A string over `{0,1}`; the first character is the most significant bit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString(String);

impl BitString {
    pub fn new(s: impl Into<String>) -> Result<Self> {
        let s = s.into();
        if s.chars().any(|c| c != '0' && c != '1') {
            return Err(Error::Parse(format!("`{s}` is not a bit string")));
        }
        Ok(Self(s))
    }

    /// The `len`-bit big-endian encoding of `value`.
    pub fn from_value(value: usize, len: usize) -> Self {
        Self((0..len).map(|i| if (value >> (len - 1 - i)) & 1 == 1 { '1' } else { '0' }).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self("0".repeat(len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn value(&self) -> usize {
        self.0.chars().fold(0, |acc, c| (acc << 1) | usize::from(c == '1'))
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0.as_bytes()[i] == b'1'
    }

    pub fn concat(parts: &[BitString]) -> Self {
        Self(parts.iter().map(|p| p.0.as_str()).collect())
    }

    /// Splits into `chunk`-bit pieces.
    pub fn chunks(&self, chunk: usize) -> Vec<BitString> {
        if chunk == 0 {
            return vec![];
        }
        self.0
            .as_bytes()
            .chunks(chunk)
            .map(|c| Self(String::from_utf8_lossy(c).into_owned()))
            .collect()
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self(self.0[..len.min(self.len())].to_string())
    }

    /// Every string of the given length in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        (0..1usize << len).map(move |v| Self::from_value(v, len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for BitString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::new(s).map_err(serde::de::Error::custom)
    }
}

/// `R = {(x, w) : table[w] = x}` for a total map from `witness_bits`-bit
/// witnesses to `instance_bits`-bit instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRelation", into = "RawRelation")]
pub struct TruthTableRelation {
    instance_bits: usize,
    witness_bits: usize,
    table: Vec<BitString>,
}

#[derive(Serialize, Deserialize)]
struct RawRelation {
    instance_bits: usize,
    witness_bits: usize,
    table: BTreeMap<BitString, BitString>,
}

impl TryFrom<RawRelation> for TruthTableRelation {
    type Error = Error;
    fn try_from(raw: RawRelation) -> Result<Self> {
        let mut table = Vec::with_capacity(1 << raw.witness_bits);
        for w in BitString::all(raw.witness_bits) {
            let x = raw
                .table
                .get(&w)
                .ok_or_else(|| Error::Parse(format!("relation table misses witness {w}")))?;
            table.push(x.clone());
        }
        if raw.table.len() != table.len() {
            return Err(Error::Parse("relation table has extra entries".into()));
        }
        Self::new(raw.instance_bits, raw.witness_bits, table)
    }
}

impl From<TruthTableRelation> for RawRelation {
    fn from(r: TruthTableRelation) -> Self {
        Self {
            instance_bits: r.instance_bits,
            witness_bits: r.witness_bits,
            table: BitString::all(r.witness_bits).zip(r.table).collect(),
        }
    }
}

/// Largest witness length a relation table may have.
pub const MAX_TABLE_WITNESS_BITS: usize = 16;

impl TruthTableRelation {
    /// `table[v]` is the instance of the witness whose value is `v`.
    pub fn new(instance_bits: usize, witness_bits: usize, table: Vec<BitString>) -> Result<Self> {
        if witness_bits > MAX_TABLE_WITNESS_BITS {
            return Err(Error::Misconfigured(format!("{witness_bits}-bit witnesses are too long")));
        }
        if table.len() != 1 << witness_bits {
            return Err(Error::Parse(format!(
                "relation table has {} entries, expected {}",
                table.len(),
                1usize << witness_bits
            )));
        }
        if let Some(bad) = table.iter().find(|x| x.len() != instance_bits) {
            return Err(Error::Parse(format!("instance `{bad}` is not {instance_bits} bits")));
        }
        Ok(Self {
            instance_bits,
            witness_bits,
            table,
        })
    }

    /// Builds the table from a function of the witness value.
    pub fn from_fn(instance_bits: usize, witness_bits: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        let table = (0..1usize << witness_bits)
            .map(|w| BitString::from_value(f(w), instance_bits))
            .collect();
        Self::new(instance_bits, witness_bits, table)
    }

    pub fn instance_bits(&self) -> usize {
        self.instance_bits
    }

    pub fn witness_bits(&self) -> usize {
        self.witness_bits
    }

    pub fn image(&self, w: &BitString) -> Result<&BitString> {
        self.check_witness(w)?;
        Ok(&self.table[w.value()])
    }

    pub fn holds(&self, x: &BitString, w: &BitString) -> bool {
        w.len() == self.witness_bits && x.len() == self.instance_bits && &self.table[w.value()] == x
    }

    /// Valid witnesses of `x`, lexicographically ordered.
    pub fn witnesses(&self, x: &BitString) -> Vec<BitString> {
        BitString::all(self.witness_bits).filter(|w| self.holds(x, w)).collect()
    }

    pub fn is_yes(&self, x: &BitString) -> bool {
        !self.witnesses(x).is_empty()
    }

    pub fn check_instance(&self, x: &BitString) -> Result<()> {
        if x.len() != self.instance_bits {
            return Err(Error::InvalidWitness(format!(
                "instance `{x}` is not {} bits",
                self.instance_bits
            )));
        }
        Ok(())
    }

    pub fn check_witness(&self, w: &BitString) -> Result<()> {
        if w.len() != self.witness_bits {
            return Err(Error::InvalidWitness(format!(
                "witness `{w}` is not {} bits",
                self.witness_bits
            )));
        }
        Ok(())
    }

    /// The batch relation over `t` coordinates: concatenated instances and
    /// witnesses, valid iff every coordinate is valid.
    pub fn batch(&self, t: usize) -> Result<Self> {
        let wb = self.witness_bits * t;
        if wb > MAX_TABLE_WITNESS_BITS {
            return Err(Error::Misconfigured(format!(
                "batch of {t} needs {wb}-bit witnesses"
            )));
        }
        let table = BitString::all(wb)
            .map(|w| BitString::concat(&w.chunks(self.witness_bits).iter().map(|c| self.table[c.value()].clone()).collect::<Vec<_>>()))
            .collect();
        Self::new(self.instance_bits * t, wb, table)
    }

    /// Triples `(x, w0, w1)` with both pairs in the relation, ordered by
    /// `x`, then `w0`, then `w1`.
    pub fn witness_pairs(&self) -> Vec<(BitString, BitString, BitString)> {
        let mut out = Vec::new();
        for x in BitString::all(self.instance_bits) {
            let ws = self.witnesses(&x);
            for w0 in &ws {
                for w1 in &ws {
                    out.push((x.clone(), w0.clone(), w1.clone()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    fn sample() -> TruthTableRelation {
        TruthTableRelation::new(2, 2, vec![bs("00"), bs("01"), bs("00"), bs("10")]).unwrap()
    }

    #[test]
    fn bitstring_values() {
        assert_eq!(bs("0110").value(), 6);
        assert_eq!(BitString::from_value(6, 4), bs("0110"));
        assert!(BitString::new("012").is_err());
        assert_eq!(bs("1011").chunks(2), vec![bs("10"), bs("11")]);
    }

    #[test]
    fn witnesses_are_lexicographic() {
        let r = sample();
        assert_eq!(r.witnesses(&bs("00")), vec![bs("00"), bs("10")]);
        assert!(r.witnesses(&bs("11")).is_empty());
        assert!(r.holds(&bs("10"), &bs("11")));
        assert_eq!(r.witness_pairs().len(), 6);
    }

    #[test]
    fn batch_is_coordinatewise() {
        let r = sample().batch(2).unwrap();
        assert!(r.holds(&bs("0010"), &bs("1011")));
        assert!(!r.holds(&bs("0011"), &bs("1011")));
        assert_eq!(r.witnesses(&bs("0000")).len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"01\":\"01\""));
        let back: TruthTableRelation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
