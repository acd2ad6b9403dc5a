//! Named qubit groups with a global ordering.
//!
//! The first-listed group occupies the most significant qubit positions, and
//! within a group offset 0 is the most significant qubit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub qubits: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Group>", into = "Vec<Group>")]
pub struct RegisterLayout {
    groups: Vec<Group>,
}

/// A single qubit: group name plus offset within the group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitAddr {
    pub group: String,
    pub offset: usize,
}

impl QubitAddr {
    pub fn new(group: impl Into<String>, offset: usize) -> Self {
        Self {
            group: group.into(),
            offset,
        }
    }
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(groups: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut layout = Self::default();
        for (name, qubits) in groups {
            layout.push(name, qubits)?;
        }
        Ok(layout)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, qubits: usize) -> Result<()> {
        let name = name.into();
        if self.groups.iter().any(|g| g.name == name) {
            return Err(Error::DuplicateGroup(name));
        }
        self.groups.push(Group { name, qubits });
        Ok(())
    }

    /// Concatenation; group names must stay unique.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for g in &other.groups {
            out.push(g.name.clone(), g.qubits)?;
        }
        Ok(out)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group_names(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.name.clone()).collect()
    }

    pub fn total_qubits(&self) -> usize {
        self.groups.iter().map(|g| g.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.groups.iter().any(|g| g.name == name)
    }

    pub fn group(&self, name: &str) -> Result<&Group> {
        self.groups
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| Error::UnknownGroup(name.to_string()))
    }

    /// Global position (0 = most significant) of the first qubit of a group.
    pub fn group_start(&self, name: &str) -> Result<usize> {
        let mut start = 0;
        for g in &self.groups {
            if g.name == name {
                return Ok(start);
            }
            start += g.qubits;
        }
        Err(Error::UnknownGroup(name.to_string()))
    }

    pub fn position(&self, addr: &QubitAddr) -> Result<usize> {
        let g = self.group(&addr.group)?;
        if addr.offset >= g.qubits {
            return Err(Error::IndexOutOfRange(format!(
                "offset {} in group `{}` of {} qubits",
                addr.offset, addr.group, g.qubits
            )));
        }
        Ok(self.group_start(&addr.group)? + addr.offset)
    }

    /// Global positions of every qubit of a group, most significant first.
    pub fn positions(&self, name: &str) -> Result<Vec<usize>> {
        let start = self.group_start(name)?;
        let g = self.group(name)?;
        Ok((start..start + g.qubits).collect())
    }

    /// All qubits of a group as addresses.
    pub fn addrs(&self, name: &str) -> Result<Vec<QubitAddr>> {
        let g = self.group(name)?;
        Ok((0..g.qubits).map(|o| QubitAddr::new(name, o)).collect())
    }

    /// Every qubit in layout order.
    pub fn all_addrs(&self) -> Vec<QubitAddr> {
        self.groups
            .iter()
            .flat_map(|g| (0..g.qubits).map(move |o| QubitAddr::new(g.name.clone(), o)))
            .collect()
    }

    /// Layout restricted to the named groups, in this layout's order.
    pub fn restrict(&self, keep: &[String]) -> Result<Self> {
        for k in keep {
            self.group(k)?;
        }
        Ok(Self {
            groups: self
                .groups
                .iter()
                .filter(|g| keep.contains(&g.name))
                .cloned()
                .collect(),
        })
    }

    pub fn without(&self, drop: &[String]) -> Result<Self> {
        for d in drop {
            self.group(d)?;
        }
        Ok(Self {
            groups: self
                .groups
                .iter()
                .filter(|g| !drop.contains(&g.name))
                .cloned()
                .collect(),
        })
    }

    /// True when every group of `sub` appears here with the same size.
    pub fn has_sublayout(&self, sub: &Self) -> bool {
        sub.groups
            .iter()
            .all(|g| self.groups.iter().any(|h| h.name == g.name && h.qubits == g.qubits))
    }

    pub fn check_cap(&self, cap: usize) -> Result<()> {
        let q = self.total_qubits();
        if q > cap {
            return Err(Error::DimensionCapExceeded { qubits: q, cap });
        }
        Ok(())
    }

    /// Prefix every group name.
    pub fn prefixed(&self, prefix: &str) -> Self {
        Self {
            groups: self
                .groups
                .iter()
                .map(|g| Group {
                    name: format!("{prefix}{}", g.name),
                    qubits: g.qubits,
                })
                .collect(),
        }
    }
}

impl TryFrom<Vec<Group>> for RegisterLayout {
    type Error = Error;
    fn try_from(groups: Vec<Group>) -> Result<Self> {
        Self::new(groups.into_iter().map(|g| (g.name, g.qubits)))
    }
}

impl From<RegisterLayout> for Vec<Group> {
    fn from(l: RegisterLayout) -> Self {
        l.groups
    }
}

/// Number of qubits needed to hold values `0..n`.
pub fn bits_for(n: usize) -> usize {
    let mut b = 0;
    while (1usize << b) < n {
        b += 1;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_follow_listing_order() {
        let l = RegisterLayout::new([("a", 2), ("b", 3)]).unwrap();
        assert_eq!(l.total_qubits(), 5);
        assert_eq!(l.positions("b").unwrap(), vec![2, 3, 4]);
        assert_eq!(l.position(&QubitAddr::new("a", 1)).unwrap(), 1);
        assert!(l.position(&QubitAddr::new("a", 2)).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(matches!(
            RegisterLayout::new([("a", 1), ("a", 2)]),
            Err(Error::DuplicateGroup(_))
        ));
    }

    #[test]
    fn cap_enforced() {
        let l = RegisterLayout::new([("a", 10), ("b", 5)]).unwrap();
        assert!(l.check_cap(DEFAULT_QUBIT_CAP).is_err());
        assert!(l.check_cap(15).is_ok());
    }

    #[test]
    fn bits_for_values() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(32), 5);
    }
}
