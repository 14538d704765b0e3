//! Artifact serialization: a stable JSON envelope around every result.
//!
//! Schema (version 1): top-level keys, in order, are `schema_version`,
//! `method`, `reference` (`{ label, n_rows, spec }`), `seed` and
//! `payload`. No artifact can be serialized without its reference context:
//! the envelope constructor requires it. Numbers are written in the
//! shortest decimal form that parses back to the identical `f64` (never
//! fewer meaningful digits than the value carries), and key order is fixed
//! by struct declaration, so identical inputs yield identical bytes.

use refx_core::{AttributionSet, ContrastReport, DriftReport, ImportanceTable, Profile};
use serde::{Deserialize, Serialize};

/// The data context an artifact was computed against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub label: String,
    pub n_rows: usize,
    /// Verbatim reference spec from the run config (or a canonical
    /// description when built programmatically).
    pub spec: String,
}

impl ReferenceInfo {
    pub fn of(reference: &refx_core::ReferenceSample) -> Self {
        ReferenceInfo {
            label: reference.label().to_string(),
            n_rows: reference.n_rows(),
            spec: reference.source().to_string(),
        }
    }
}

/// Any serializable explanation result.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Artifact {
    Attribution(AttributionSet),
    Profile(Profile),
    Importance(ImportanceTable),
    Contrast(ContrastReport),
    Drift(DriftReport),
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    method: &'a str,
    reference: &'a ReferenceInfo,
    seed: Option<u64>,
    payload: &'a Artifact,
}

/// Parsed form of an emitted artifact, for consumers and round-trip tests.
#[derive(Debug, Deserialize)]
pub struct ParsedEnvelope {
    pub schema_version: u32,
    pub method: String,
    pub reference: ReferenceInfo,
    pub seed: Option<u64>,
    pub payload: serde_json::Value,
}

/// Serialize an artifact with its context. Deterministic: identical inputs
/// produce identical bytes.
pub fn emit_json(
    method: &str,
    reference: &ReferenceInfo,
    seed: Option<u64>,
    payload: &Artifact,
) -> Vec<u8> {
    let envelope = Envelope {
        schema_version: 1,
        method,
        reference,
        seed,
        payload,
    };
    let mut bytes = serde_json::to_vec_pretty(&envelope).expect("artifacts always serialize");
    bytes.push(b'\n');
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;
    use refx_core::{linear_model, ref_gaussian, shapley_exact, NamedRow};

    fn sample_attribution() -> (AttributionSet, ReferenceInfo) {
        let model = linear_model(
            &[("wages".into(), 5.0 / 3.0), ("savings".into(), 2.0 / 3.0)],
            0.0,
        )
        .unwrap();
        let reference = ref_gaussian(
            &[("savings".into(), 75.0, 0.0), ("wages".into(), 60.0, 0.0)],
            1,
            0,
            "paid",
        )
        .unwrap();
        let instance = NamedRow {
            names: vec!["wages".into(), "savings".into()],
            values: vec![35.0, 40.0],
        };
        let set = shapley_exact(&model, &reference, &instance, None).unwrap();
        let info = ReferenceInfo::of(&reference);
        (set, info)
    }

    #[test]
    fn emit_is_deterministic() {
        let (set, info) = sample_attribution();
        let a = emit_json(
            "shapley_exact",
            &info,
            None,
            &Artifact::Attribution(set.clone()),
        );
        let b = emit_json("shapley_exact", &info, None, &Artifact::Attribution(set));
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_preserves_structure() {
        let (set, info) = sample_attribution();
        let bytes = emit_json(
            "shapley_exact",
            &info,
            Some(9),
            &Artifact::Attribution(set.clone()),
        );
        let parsed: ParsedEnvelope = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(parsed.schema_version, 1);
        assert_eq!(parsed.method, "shapley_exact");
        assert_eq!(parsed.reference.label, "paid");
        assert_eq!(parsed.reference.n_rows, 1);
        assert_eq!(parsed.seed, Some(9));
        let back: AttributionSet = serde_json::from_value(parsed.payload).unwrap();
        assert_eq!(back.contributions, set.contributions);
        assert_eq!(back.instance, set.instance);
    }

    // completeness must be reconstructable from the emitted file alone
    #[test]
    fn completeness_recomputable_from_payload() {
        let (set, info) = sample_attribution();
        let bytes = emit_json("shapley_exact", &info, None, &Artifact::Attribution(set));
        let parsed: ParsedEnvelope = serde_json::from_slice(&bytes).unwrap();
        let payload = parsed.payload;
        let contributions: Vec<f64> = payload["contributions"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let baseline = payload["baseline"].as_f64().unwrap();
        let prediction = payload["prediction"].as_f64().unwrap();
        let gap = (contributions.iter().sum::<f64>() - (prediction - baseline)).abs();
        assert!(gap < 1e-9, "completeness gap from file: {gap}");
    }
}
