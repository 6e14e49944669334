//! JSON set descriptors and CSV sweep export.
//!
//! The descriptor shape is stable:
//!
//! ```json
//! {"kind": "points", "points": [0.0, 3.14159]}
//! {"kind": "arcs",   "arcs": [{"start": 0.0, "length": 0.5}]}
//! {"kind": "cantor", "cantor": {"rule": "geometric",
//!                               "params": {"l0": 1.5707, "lambda": 0.3333},
//!                               "generation": 12}}
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::circle::{Arc, CantorSpec, CircleSet, LengthRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcDescriptor {
    pub start: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CantorDescriptor {
    pub rule: String,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub generation: u32,
}

/// Serializable description of a boundary set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetDescriptor {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<ArcDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantor: Option<CantorDescriptor>,
}

impl SetDescriptor {
    pub fn points(points: Vec<f64>) -> Self {
        Self { kind: "points".into(), points: Some(points), arcs: None, cantor: None }
    }

    pub fn cantor(rule: &LengthRule, generation: u32) -> Self {
        let mut params = serde_json::Map::new();
        let name = match rule {
            LengthRule::Geometric { l0, lambda } => {
                params.insert("l0".into(), (*l0).into());
                params.insert("lambda".into(), (*lambda).into());
                "geometric"
            }
            LengthRule::DoubleExp { l0, c, p } => {
                params.insert("l0".into(), (*l0).into());
                params.insert("c".into(), (*c).into());
                params.insert("p".into(), (*p).into());
                "double_exp"
            }
            LengthRule::Explicit { lengths } => {
                params.insert(
                    "lengths".into(),
                    serde_json::Value::Array(lengths.iter().map(|&l| l.into()).collect()),
                );
                "explicit"
            }
        };
        Self {
            kind: "cantor".into(),
            points: None,
            arcs: None,
            cantor: Some(CantorDescriptor { rule: name.into(), params, generation }),
        }
    }

    /// Parses from a JSON string.
    pub fn from_json(text: &str) -> Result<Self> {
        let d: SetDescriptor =
            serde_json::from_str(text).map_err(|e| Error::Descriptor(e.to_string()))?;
        Ok(d)
    }

    /// Realizes the descriptor as a `CircleSet`.
    pub fn build(&self) -> Result<CircleSet> {
        match self.kind.as_str() {
            "points" => {
                let pts = self
                    .points
                    .as_ref()
                    .ok_or_else(|| Error::Descriptor("kind=points needs `points`".into()))?;
                CircleSet::from_points(pts)
            }
            "arcs" => {
                let arcs = self
                    .arcs
                    .as_ref()
                    .ok_or_else(|| Error::Descriptor("kind=arcs needs `arcs`".into()))?;
                let arcs = arcs
                    .iter()
                    .map(|a| Arc::new(a.start, a.length))
                    .collect::<Result<Vec<_>>>()?;
                CircleSet::from_arcs(arcs)
            }
            "cantor" => {
                let c = self
                    .cantor
                    .as_ref()
                    .ok_or_else(|| Error::Descriptor("kind=cantor needs `cantor`".into()))?;
                let spec = parse_cantor(c)?;
                CircleSet::cantor(&spec, c.generation)
            }
            other => Err(Error::Descriptor(format!("unknown kind `{other}`"))),
        }
    }
}

fn get_f64(
    params: &serde_json::Map<String, serde_json::Value>,
    key: &str,
    default: Option<f64>,
) -> Result<f64> {
    match params.get(key) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::Descriptor(format!("param `{key}` must be a number"))),
        None => default.ok_or_else(|| Error::Descriptor(format!("missing param `{key}`"))),
    }
}

/// Parses the cantor descriptor; `l0` defaults to π/2 anchored at angle 0.
pub fn parse_cantor(c: &CantorDescriptor) -> Result<CantorSpec> {
    let rule = match c.rule.as_str() {
        "geometric" => LengthRule::Geometric {
            l0: get_f64(&c.params, "l0", Some(PI / 2.0))?,
            lambda: get_f64(&c.params, "lambda", None)?,
        },
        "double_exp" => LengthRule::DoubleExp {
            l0: get_f64(&c.params, "l0", Some(PI / 2.0))?,
            c: get_f64(&c.params, "c", Some(1.0))?,
            p: get_f64(&c.params, "p", Some(0.0))?,
        },
        "explicit" => {
            let lengths = c
                .params
                .get("lengths")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Descriptor("explicit rule needs `lengths`".into()))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::Descriptor("lengths must be numbers".into()))
                })
                .collect::<Result<Vec<f64>>>()?;
            LengthRule::Explicit { lengths }
        }
        other => return Err(Error::Descriptor(format!("unknown cantor rule `{other}`"))),
    };
    let base_start = get_f64(&c.params, "base_start", Some(0.0))?;
    let mut spec = CantorSpec::new(rule, base_start);
    if let Some(h) = c.params.get("horizon").and_then(|v| v.as_u64()) {
        spec.horizon = h as u32;
    }
    spec.validate(c.generation)?;
    Ok(spec)
}

/// One row of a geometry sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub counting: u64,
    pub measure: f64,
}

/// Log-spaced sweep of `(t, N_E(t), |E_t|)` over `[t_lo, π]`.
pub fn sweep(set: &CircleSet, rows: usize, t_lo: f64) -> Vec<SweepRow> {
    let counting = set.counting_function();
    let measure = set.neighborhood_measure();
    let lo = t_lo.max(1e-15);
    (0..rows)
        .map(|i| {
            let t = lo * (PI / lo).powf(i as f64 / (rows - 1).max(1) as f64);
            SweepRow { t, counting: counting.value(t), measure: measure.value(t) }
        })
        .collect()
}

/// Renders sweep rows as CSV (header + shortest-roundtrip floats).
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("t,counting,measure\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.t, r.counting, r.measure));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let d = SetDescriptor::points(vec![0.0, 1.0]);
        let json = serde_json::to_string(&d).unwrap();
        let back = SetDescriptor::from_json(&json).unwrap();
        let set = back.build().unwrap();
        assert_eq!(set.arcs().len(), 2);
    }

    #[test]
    fn cantor_descriptor_defaults() {
        let text = r#"{"kind":"cantor","cantor":{"rule":"geometric","params":{"lambda":0.3333},"generation":4}}"#;
        let set = SetDescriptor::from_json(text).unwrap().build().unwrap();
        assert_eq!(set.arcs().len(), 16);
        // Default l0 = pi/2 anchored at 0.
        assert!((set.arcs()[0].start() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn bad_descriptors_are_rejected() {
        assert!(SetDescriptor::from_json("{\"kind\":\"nope\"}")
            .unwrap()
            .build()
            .is_err());
        let text = r#"{"kind":"cantor","cantor":{"rule":"geometric","params":{"lambda":0.6},"generation":3}}"#;
        assert!(SetDescriptor::from_json(text).unwrap().build().is_err());
    }

    #[test]
    fn sweep_of_single_point() {
        let set = CircleSet::from_points(&[0.0]).unwrap();
        let rows = sweep(&set, 64, 1e-6);
        for r in &rows {
            assert_eq!(r.counting, 2);
            assert!((r.measure - 2.0 * r.t).abs() < 1e-12 * (1.0 + r.measure));
        }
        let csv = sweep_to_csv(&rows);
        assert!(csv.starts_with("t,counting,measure\n"));
        assert_eq!(csv.lines().count(), 65);
    }
}
