//! Plot styling with patch semantics over the defaults.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExportError;
use crate::autorepo::{BranchClass, LabelTag};

pub type Rgb = [f64; 3];

pub fn hex(c: Rgb) -> String {
    let b = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", b(c[0]), b(c[1]), b(c[2]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerShape {
    Square,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    None,
    Solid,
    Dashed,
    Dotted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineStyle {
    pub color: Rgb,
    pub line: LineKind,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerStyle {
    pub color: Rgb,
    pub shape: MarkerShape,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotStyle {
    pub width: f64,
    pub height: f64,
    /// `px`, `pt`, `mm`, `cm` or `in`.
    pub units: String,
    pub font_name: String,
    pub font_size: f64,
    pub grid: GridKind,
    pub grid_alpha: f64,
    /// Raster resolution tag. SVG is vector output, so any value is ignored.
    pub resolution: Option<String>,
    pub branches: IndexMap<BranchClass, LineStyle>,
    pub markers: IndexMap<LabelTag, MarkerStyle>,
    /// Nullcline colors, index 1 then index 2.
    pub nullclines: [LineStyle; 2],
    /// Simulation traces and the unit cylinder of eigenvalue plots.
    pub trace: LineStyle,
    pub cylinder: LineStyle,
}

fn line(color: Rgb) -> LineStyle {
    LineStyle { color, line: LineKind::Solid, width: 1.5 }
}

fn marker(color: Rgb, shape: MarkerShape, size: f64) -> MarkerStyle {
    MarkerStyle { color, shape, size }
}

impl Default for PlotStyle {
    fn default() -> Self {
        use BranchClass::*;
        use MarkerShape::*;
        let branches = [
            (SEQ, line([1.0, 0.0, 0.0])),
            (UEQ, line([0.0, 0.0, 0.0])),
            (SLC, line([0.0, 0.6, 0.0])),
            (ULC, line([0.0, 0.0, 1.0])),
            (BVP, line([0.49, 0.18, 0.56])),
            (UZ, line([0.5, 0.5, 0.5])),
            (SN, line([0.0, 0.75, 0.75])),
            (SNPO, line([1.0, 0.5, 0.0])),
            (HB, line([1.0, 0.0, 1.0])),
            (TR, line([0.55, 0.27, 0.07])),
            (BP, line([0.5, 0.5, 0.0])),
            (PD, line([0.0, 0.5, 0.5])),
        ]
        .into_iter()
        .collect();
        let markers = [
            (LabelTag::HB, marker([1.0, 0.0, 1.0], Square, 7.0)),
            (LabelTag::SN, marker([0.0, 0.75, 0.75], Circle, 7.0)),
            (LabelTag::PD, marker([0.0, 0.5, 0.5], Circle, 7.0)),
            (LabelTag::SNPO, marker([1.0, 0.5, 0.0], Circle, 7.0)),
            (LabelTag::TR, marker([0.55, 0.27, 0.07], Square, 7.0)),
            (LabelTag::EP, marker([0.3, 0.3, 0.3], Square, 5.0)),
            (LabelTag::UZ, marker([0.5, 0.5, 0.5], Circle, 3.0)),
        ]
        .into_iter()
        .collect();
        PlotStyle {
            width: 640.0,
            height: 480.0,
            units: "px".into(),
            font_name: "Helvetica".into(),
            font_size: 12.0,
            grid: GridKind::Dotted,
            grid_alpha: 0.4,
            resolution: None,
            branches,
            markers,
            nullclines: [line([1.0, 0.55, 0.0]), line([0.3, 0.75, 0.93])],
            trace: line([0.0, 0.45, 0.74]),
            cylinder: LineStyle { color: [0.6, 0.6, 0.6], line: LineKind::Dashed, width: 0.8 },
        }
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

impl PlotStyle {
    /// Overlay a partial JSON style document. Keys absent from the patch keep
    /// their current value.
    pub fn patch_json(&mut self, patch: &Value) -> Result<(), ExportError> {
        let mut base = serde_json::to_value(&*self).expect("style serializes");
        merge(&mut base, patch);
        let next: PlotStyle = serde_json::from_value(base)
            .map_err(|e| ExportError::BadStyle { key: "<document>".into(), msg: e.to_string() })?;
        if next.width <= 0.0 || next.height <= 0.0 {
            return Err(ExportError::BadStyle { key: "width/height".into(), msg: "must be positive".into() });
        }
        if !["px", "pt", "mm", "cm", "in"].contains(&next.units.as_str()) {
            return Err(ExportError::BadStyle { key: "units".into(), msg: format!("unknown unit `{}`", next.units) });
        }
        *self = next;
        Ok(())
    }

    /// Apply one `key=value` override. Keys are dotted paths into the JSON
    /// form (`SEQ.color`, `markers.HB.size`, `font_size`); a bare class name
    /// addresses `branches`. Values are JSON, a comma-separated number list,
    /// or a plain string.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ExportError> {
        let mut path: Vec<&str> = key.split('.').collect();
        if BranchClass::ALL.iter().any(|c| c.name() == path[0]) {
            path.insert(0, "branches");
        }
        let known = serde_json::to_value(&*self).expect("style serializes");
        let mut cursor = &known;
        for p in &path {
            cursor = cursor
                .get(p)
                .ok_or_else(|| ExportError::BadStyle { key: key.to_string(), msg: "no such style attribute".into() })?;
        }
        let parsed = serde_json::from_str::<Value>(value).unwrap_or_else(|_| {
            let nums: Option<Vec<f64>> = value.split(',').map(|s| s.trim().parse().ok()).collect();
            match nums {
                Some(v) if v.len() > 1 => Value::from(v),
                _ => Value::String(value.to_string()),
            }
        });
        let mut patch = parsed;
        for p in path.iter().rev() {
            let mut m = serde_json::Map::new();
            m.insert(p.to_string(), patch);
            patch = Value::Object(m);
        }
        self.patch_json(&patch).map_err(|e| match e {
            ExportError::BadStyle { msg, .. } => ExportError::BadStyle { key: key.to_string(), msg },
            other => other,
        })
    }

    /// Width and height in CSS pixels.
    pub fn pixel_size(&self) -> (f64, f64) {
        let k = match self.units.as_str() {
            "pt" => 96.0 / 72.0,
            "mm" => 96.0 / 25.4,
            "cm" => 96.0 / 2.54,
            "in" => 96.0,
            _ => 1.0,
        };
        (self.width * k, self.height * k)
    }
}
