use std::fmt;

use super::{AssetKind, AssetVersion};

#[derive(Debug, Clone, PartialEq)]
pub struct StorageRow {
    pub kind: AssetKind,
    pub bytes: u128,
    /// One decimal place.
    pub percent: f64,
}

/// Bytes and share of total storage per asset kind, in canonical kind order.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageReport {
    pub rows: Vec<StorageRow>,
    pub total: u128,
}

impl StorageReport {
    pub fn percent(&self, kind: AssetKind) -> f64 {
        self.rows
            .iter()
            .find(|r| r.kind == kind)
            .map_or(0.0, |r| r.percent)
    }
}

impl fmt::Display for StorageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(
                f,
                "{:<14} {:>16} {:>5.1}%",
                row.kind.name(),
                row.bytes,
                row.percent
            )?;
        }
        write!(f, "{:<14} {:>16}", "total", self.total)
    }
}

/// Shares are rounded to tenths by the largest-remainder method, so they sum
/// to exactly 100.0 whenever the total is positive.
pub fn storage_report<'a>(assets: impl IntoIterator<Item = &'a AssetVersion>) -> StorageReport {
    let mut bytes = [0u128; 5];
    for a in assets {
        let i = AssetKind::ALL
            .iter()
            .position(|k| *k == a.kind)
            .expect("every kind is listed");
        bytes[i] += u128::from(a.size_bytes);
    }
    StorageReport {
        rows: AssetKind::ALL
            .iter()
            .zip(bytes)
            .zip(tenths(&bytes))
            .map(|((&kind, bytes), t)| StorageRow {
                kind,
                bytes,
                percent: t as f64 / 10.0,
            })
            .collect(),
        total: bytes.iter().sum(),
    }
}

fn tenths(bytes: &[u128; 5]) -> [u128; 5] {
    let total: u128 = bytes.iter().sum();
    let mut out = [0u128; 5];
    if total == 0 {
        return out;
    }
    let mut remainders = [(0u128, 0usize); 5];
    for (i, &b) in bytes.iter().enumerate() {
        out[i] = b * 1000 / total;
        remainders[i] = (b * 1000 % total, i);
    }
    let missing = 1000 - out.iter().sum::<u128>();
    // Largest remainder first; earlier kinds win ties.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(missing as usize) {
        out[i] += 1;
    }
    out
}
