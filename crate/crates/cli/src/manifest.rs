//! Asset manifest and its comparison table.

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRow {
    pub asset_name: String,
    pub apartment_count: u64,
    /// Rooms summed over all apartments.
    pub room_count: u64,
    /// Distinct object categories.
    pub category_count: u64,
    pub object_count: u64,
    /// Counted within `object_count`.
    pub articulated_object_count: u64,
}

impl ManifestRow {
    fn counts(&self) -> [u64; 5] {
        [
            self.apartment_count,
            self.room_count,
            self.category_count,
            self.object_count,
            self.articulated_object_count,
        ]
    }
}

pub const COLUMNS: [&str; 5] = ["Apt.", "Rm.", "Cat.", "Obj.", "A.O."];

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    Format(String),
}

pub fn parse_manifest(source: &str) -> Result<Vec<ManifestRow>, ManifestError> {
    let rows: Vec<ManifestRow> = serde_json::from_str(source).map_err(|e| ManifestError::Format(e.to_string()))?;
    for r in &rows {
        if r.articulated_object_count > r.object_count {
            return Err(ManifestError::Format(format!(
                "{}: articulated objects ({}) exceed objects ({})",
                r.asset_name, r.articulated_object_count, r.object_count
            )));
        }
    }
    Ok(rows)
}

/// Space-aligned table; counts are right-aligned.
pub fn render_plain(rows: &[ManifestRow]) -> String {
    let cells: Vec<[String; 5]> = rows.iter().map(|r| r.counts().map(|c| c.to_string())).collect();
    let name_w = rows.iter().map(|r| r.asset_name.len()).chain([5]).max().unwrap_or(5);
    let mut widths = COLUMNS.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = format!("{:<name_w$}", "Asset");
    for (h, w) in COLUMNS.iter().zip(widths) {
        out.push_str(&format!("  {h:>w$}"));
    }
    out.push('\n');
    for (r, row) in rows.iter().zip(&cells) {
        out.push_str(&format!("{:<name_w$}", r.asset_name));
        for (c, w) in row.iter().zip(widths) {
            out.push_str(&format!("  {c:>w$}"));
        }
        out.push('\n');
    }
    out
}

/// Markdown table with each column's maximum in bold (all ties bolded).
pub fn render_markdown(rows: &[ManifestRow]) -> String {
    let mut maxima = [0u64; 5];
    for r in rows {
        for (m, c) in maxima.iter_mut().zip(r.counts()) {
            *m = (*m).max(c);
        }
    }
    let mut out = format!("| Asset | {} |\n", COLUMNS.join(" | "));
    out.push_str("|---|---:|---:|---:|---:|---:|\n");
    for r in rows {
        let cells: Vec<String> = r
            .counts()
            .iter()
            .zip(maxima)
            .map(|(&c, m)| if c == m { format!("**{c}**") } else { c.to_string() })
            .collect();
        out.push_str(&format!("| {} | {} |\n", r.asset_name, cells.join(" | ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"[
        {"asset_name": "A", "apartment_count": 3, "room_count": 10, "category_count": 5, "object_count": 40, "articulated_object_count": 2},
        {"asset_name": "B", "apartment_count": 7, "room_count": 4, "category_count": 5, "object_count": 12, "articulated_object_count": 9},
        {"asset_name": "C", "apartment_count": 1, "room_count": 2, "category_count": 1, "object_count": 90, "articulated_object_count": 0}
    ]"#;

    #[test]
    fn bolds_column_maxima() {
        let md = render_markdown(&parse_manifest(THREE).unwrap());
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[2], "| A | 3 | **10** | **5** | 40 | 2 |");
        assert_eq!(lines[3], "| B | **7** | 4 | **5** | 12 | **9** |");
        assert_eq!(lines[4], "| C | 1 | 2 | 1 | **90** | 0 |");
    }

    #[test]
    fn plain_columns_align() {
        let plain = render_plain(&parse_manifest(THREE).unwrap());
        let widths: Vec<usize> = plain.lines().map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{plain}");
        assert!(plain.starts_with("Asset  Apt.  Rm.  Cat.  Obj.  A.O."));
    }

    #[test]
    fn malformed_manifests() {
        assert!(parse_manifest("{}").is_err());
        assert!(parse_manifest(&THREE.replace("\"apartment_count\": 3", "\"apartment_count\": -3")).is_err());
        assert!(parse_manifest(&THREE.replace("\"articulated_object_count\": 9", "\"articulated_object_count\": 13")).is_err());
        assert!(parse_manifest(&THREE.replace("\"asset_name\": \"C\",", "\"asset_name\": \"C\", \"layouts\": 1,")).is_err());
    }
}
