use std::collections::BTreeSet;
use std::fmt;

use super::{AssetKind, AssetVersion};

/// Numeric and format limits applied to asset versions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintProfile {
    pub scanned_polygons_min: u64,
    pub scanned_polygons_max: u64,
    /// Per side, in pixels.
    pub texture_max_px: u32,
    /// Decimal bytes.
    pub sls_processed_max_bytes: u64,
    pub optimised_formats: BTreeSet<String>,
    pub high_poly_formats: BTreeSet<String>,
    pub texture_formats: BTreeSet<String>,
    pub raw_photogrammetry_formats: BTreeSet<String>,
    pub raw_sls_formats: BTreeSet<String>,
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for ConstraintProfile {
    fn default() -> Self {
        ConstraintProfile {
            scanned_polygons_min: 500_000,
            scanned_polygons_max: 1_000_000,
            texture_max_px: 16_384,
            sls_processed_max_bytes: 800_000_000,
            optimised_formats: set(&["GLTF", "GLB"]),
            high_poly_formats: set(&["OBJ", "FBX"]),
            texture_formats: set(&["PNG", "JPG"]),
            raw_photogrammetry_formats: set(&["RAW", "TIFF"]),
            raw_sls_formats: set(&["PLY"]),
        }
    }
}

impl ConstraintProfile {
    /// Overrides one limit by its field name. Format lists are comma separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let number = || {
            value
                .trim()
                .parse::<u64>()
                .map_err(|_| format!("{key}: expected a positive integer, got {value:?}"))
        };
        let formats = || -> BTreeSet<String> {
            value
                .split(',')
                .map(|f| f.trim().to_ascii_uppercase())
                .filter(|f| !f.is_empty())
                .collect()
        };
        let mut next = self.clone();
        match key {
            "scanned_polygons_min" => next.scanned_polygons_min = number()?,
            "scanned_polygons_max" => next.scanned_polygons_max = number()?,
            "texture_max_px" => {
                next.texture_max_px =
                    u32::try_from(number()?).map_err(|_| format!("{key}: out of range"))?
            }
            "sls_processed_max_bytes" => next.sls_processed_max_bytes = number()?,
            "optimised_formats" => next.optimised_formats = formats(),
            "high_poly_formats" => next.high_poly_formats = formats(),
            "texture_formats" => next.texture_formats = formats(),
            "raw_photogrammetry_formats" => next.raw_photogrammetry_formats = formats(),
            "raw_sls_formats" => next.raw_sls_formats = formats(),
            _ => return Err(format!("unknown limit {key:?}")),
        }
        next.check()?;
        *self = next;
        Ok(())
    }

    pub fn check(&self) -> Result<(), String> {
        if self.scanned_polygons_min == 0
            || self.texture_max_px == 0
            || self.sls_processed_max_bytes == 0
        {
            return Err("limits must be positive".into());
        }
        if self.scanned_polygons_min > self.scanned_polygons_max {
            return Err("scanned_polygons_min exceeds scanned_polygons_max".into());
        }
        Ok(())
    }

    /// Formats accepted for a kind, given the acquisition technique.
    fn formats_for(
        &self,
        kind: AssetKind,
        technique: Technique,
    ) -> Option<(&'static str, BTreeSet<&str>)> {
        fn names(s: &BTreeSet<String>) -> BTreeSet<&str> {
            s.iter().map(String::as_str).collect()
        }
        match kind {
            AssetKind::RawMaterial => Some(match technique {
                Technique::Sls => ("raw_sls_formats", names(&self.raw_sls_formats)),
                Technique::Photogrammetry => (
                    "raw_photogrammetry_formats",
                    names(&self.raw_photogrammetry_formats),
                ),
                Technique::Unknown => (
                    "raw_formats",
                    names(&self.raw_sls_formats)
                        .union(&names(&self.raw_photogrammetry_formats))
                        .copied()
                        .collect(),
                ),
            }),
            AssetKind::ProcessedRaw | AssetKind::HighPoly => {
                Some(("high_poly_formats", names(&self.high_poly_formats)))
            }
            AssetKind::Optimised => Some(("optimised_formats", names(&self.optimised_formats))),
            AssetKind::Documentation => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Technique {
    Sls,
    Photogrammetry,
    Unknown,
}

impl Technique {
    fn classify(text: Option<&str>) -> Self {
        match text.map(|t| t.trim().to_ascii_lowercase()) {
            Some(t) if t == "sls" || t.contains("structured light") => Technique::Sls,
            Some(t) if t.contains("photogrammetry") || t == "sfm" => Technique::Photogrammetry,
            _ => Technique::Unknown,
        }
    }
}

/// One failed constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: &'static str,
    pub observed: String,
    pub limit: String,
}

impl Violation {
    fn new(constraint: &'static str, observed: impl ToString, limit: impl ToString) -> Self {
        Violation {
            constraint,
            observed: observed.to_string(),
            limit: limit.to_string(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: observed {}, limit {}",
            self.constraint, self.observed, self.limit
        )
    }
}

fn join(set: &BTreeSet<&str>) -> String {
    set.iter().copied().collect::<Vec<_>>().join("|")
}

/// True when the asset's model and texture formats are on the profile's lists.
pub fn format_allowed(
    asset: &AssetVersion,
    profile: &ConstraintProfile,
    technique: Option<&str>,
) -> bool {
    let model_ok = profile
        .formats_for(asset.kind, Technique::classify(technique))
        .is_none_or(|(_, allowed)| allowed.contains(asset.format.as_str()));
    let texture_ok = asset
        .texture_format
        .as_ref()
        .is_none_or(|f| profile.texture_formats.contains(f));
    model_ok && texture_ok
}

/// Checks every constraint that applies to the asset. `technique` is the
/// acquisition technique of the digitised object, when known.
pub fn validate_asset(
    asset: &AssetVersion,
    profile: &ConstraintProfile,
    technique: Option<&str>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let technique = Technique::classify(technique);
    let scanned_processed = asset.kind == AssetKind::ProcessedRaw && technique == Technique::Sls;

    if scanned_processed {
        if let Some(n) = asset.polygon_count {
            if n < profile.scanned_polygons_min {
                out.push(Violation::new(
                    "scanned_polygons_min",
                    n,
                    profile.scanned_polygons_min,
                ));
            }
            if n > profile.scanned_polygons_max {
                out.push(Violation::new(
                    "scanned_polygons_max",
                    n,
                    profile.scanned_polygons_max,
                ));
            }
        }
        if asset.size_bytes > profile.sls_processed_max_bytes {
            out.push(Violation::new(
                "sls_processed_max_bytes",
                asset.size_bytes,
                profile.sls_processed_max_bytes,
            ));
        }
    }
    for side in [asset.texture_width, asset.texture_height]
        .into_iter()
        .flatten()
    {
        if side > profile.texture_max_px {
            out.push(Violation::new(
                "texture_max_px",
                format!(
                    "{}x{}",
                    asset.texture_width.unwrap_or(0),
                    asset.texture_height.unwrap_or(0)
                ),
                format!("{0}x{0}", profile.texture_max_px),
            ));
            break;
        }
    }
    if let Some((name, allowed)) = profile.formats_for(asset.kind, technique) {
        if !allowed.contains(asset.format.as_str()) {
            out.push(Violation::new(name, &asset.format, join(&allowed)));
        }
    }
    if let Some(tf) = &asset.texture_format {
        if !profile.texture_formats.contains(tf) {
            let allowed = profile.texture_formats.iter().map(String::as_str).collect();
            out.push(Violation::new("texture_formats", tf, join(&allowed)));
        }
    }
    out
}
