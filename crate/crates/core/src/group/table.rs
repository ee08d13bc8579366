//! Multiplication tables for finite factor groups.

use serde::Serialize;
use std::io::BufRead;
use std::path::Path;

use super::GroupError;

/// A finite group given by its full multiplication table.
///
/// Index 0 is always the identity. The text format is:
/// a first line `order k`, then `k` rows of `k` whitespace-separated
/// 0-based indices (row `g`, column `h` holds `g*h`), then one line of
/// `k` inverse indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteGroupTable {
    order: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
}

impl FiniteGroupTable {
    pub fn new(order: usize, table: Vec<u32>, inverse: Vec<u32>) -> Result<Self, GroupError> {
        let t = FiniteGroupTable {
            order,
            table,
            inverse,
        };
        t.validate()?;
        Ok(t)
    }

    /// The trivial group.
    pub fn trivial() -> Self {
        FiniteGroupTable {
            order: 1,
            table: vec![0],
            inverse: vec![0],
        }
    }

    /// The cyclic group of order `m` with generator 1.
    pub fn cyclic(m: usize) -> Self {
        assert!(m >= 1);
        let mut table = vec![0u32; m * m];
        let mut inverse = vec![0u32; m];
        for g in 0..m {
            for h in 0..m {
                table[g * m + h] = ((g + h) % m) as u32;
            }
            inverse[g] = ((m - g) % m) as u32;
        }
        FiniteGroupTable {
            order: m,
            table,
            inverse,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h] as usize
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g] as usize
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    fn validate(&self) -> Result<(), GroupError> {
        let k = self.order;
        if k == 0 || self.table.len() != k * k || self.inverse.len() != k {
            return Err(GroupError::InvalidTable(
                "table or inverse length does not match order".into(),
            ));
        }
        if self.table.iter().chain(self.inverse.iter()).any(|&i| (i as usize) >= k) {
            return Err(GroupError::InvalidTable("index out of range".into()));
        }
        // Rows and columns must be permutations.
        for g in 0..k {
            let mut row = vec![false; k];
            let mut col = vec![false; k];
            for h in 0..k {
                row[self.mul(g, h)] = true;
                col[self.mul(h, g)] = true;
            }
            if row.iter().any(|&b| !b) || col.iter().any(|&b| !b) {
                return Err(GroupError::InvalidTable(format!(
                    "row or column {g} is not a permutation"
                )));
            }
        }
        // Identity at index 0, two-sided.
        for g in 0..k {
            if self.mul(0, g) != g || self.mul(g, 0) != g {
                return Err(GroupError::InvalidTable("index 0 is not the identity".into()));
            }
            if self.mul(g, self.inv(g)) != 0 || self.mul(self.inv(g), g) != 0 {
                return Err(GroupError::InvalidTable(format!(
                    "inverse of {g} is inconsistent"
                )));
            }
        }
        // Associativity on all triples; orders in play are small.
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return Err(GroupError::InvalidTable(format!(
                            "associativity fails on ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses the text format described on the type.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, GroupError> {
        let mut tokens: Vec<String> = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(|e| GroupError::InvalidTable(format!("read error: {e}")))?;
            let line = line.split('#').next().unwrap_or("");
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        match it.next().as_deref() {
            Some("order") => {}
            other => {
                return Err(GroupError::InvalidTable(format!(
                    "expected leading `order`, found {other:?}"
                )))
            }
        }
        let order: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GroupError::InvalidTable("missing or malformed order".into()))?;
        let need = order * order + order;
        let rest: Vec<u32> = it
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| GroupError::InvalidTable(format!("malformed index `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        if rest.len() != need {
            return Err(GroupError::InvalidTable(format!(
                "expected {need} indices after the order line, found {}",
                rest.len()
            )));
        }
        let table = rest[..order * order].to_vec();
        let inverse = rest[order * order..].to_vec();
        FiniteGroupTable::new(order, table, inverse)
    }

    pub fn from_path(path: &Path) -> Result<Self, GroupError> {
        let file = std::fs::File::open(path)
            .map_err(|e| GroupError::InvalidTable(format!("cannot open {}: {e}", path.display())))?;
        Self::parse(std::io::BufReader::new(file))
    }

    /// Writes the table in the text format accepted by [`parse`](Self::parse).
    pub fn write<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "order {}", self.order)?;
        for g in 0..self.order {
            let row: Vec<String> = (0..self.order).map(|h| self.mul(g, h).to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        let inv: Vec<String> = (0..self.order).map(|g| self.inv(g).to_string()).collect();
        writeln!(w, "{}", inv.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_tables_are_valid() {
        for m in 1..=6 {
            let t = FiniteGroupTable::cyclic(m);
            assert_eq!(t.order(), m);
            assert_eq!(t.mul(1 % m, (m - 1) % m), 0);
        }
    }

    #[test]
    fn parse_round_trip() {
        let t = FiniteGroupTable::cyclic(4);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = FiniteGroupTable::parse(buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn parse_rejects_non_identity_zero() {
        // Swap the roles of 0 and 1 in Z_2: index 0 is no longer the identity.
        let text = "order 2\n1 0\n0 1\n1 0\n";
        let err = FiniteGroupTable::parse(text.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("identity"), "{msg}");
    }

    #[test]
    fn parse_rejects_bad_row() {
        let text = "order 2\n0 0\n1 1\n0 1\n";
        assert!(FiniteGroupTable::parse(text.as_bytes()).is_err());
    }

    #[test]
    fn parse_rejects_truncated_input() {
        let text = "order 3\n0 1 2\n";
        assert!(FiniteGroupTable::parse(text.as_bytes()).is_err());
    }
}
