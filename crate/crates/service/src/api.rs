//! Wire types for the placement API.

use de_core::controller::{DecisionDoc, RequestDoc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const API_VERSION: u32 = 1;

const REQUEST_FIELDS: &[&str] = &[
    "api_version",
    "request_id",
    "a_ends",
    "candidates",
    "legs",
    "l_max_ms",
    "util_threshold",
    "failure_sets",
];
const LEG_FIELDS: &[&str] = &["a_to_b_mbps", "b_to_a_mbps"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiPlacementResponse {
    pub api_version: u32,
    #[serde(flatten)]
    pub decision: DecisionDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            field: None,
        }
    }

    pub fn at(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub error: ApiError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub api_version: u32,
    pub nodes: usize,
    pub circuits: usize,
    pub committed_demands: usize,
    pub decisions: usize,
    pub failure_sets: String,
    pub network_wc_util: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollbackResponse {
    pub api_version: u32,
    pub request_id: String,
    pub rolled_back: bool,
    pub committed_demands: usize,
}

/// A request body with `api_version` checked and, in lenient mode, unknown
/// fields removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRequest {
    pub doc: RequestDoc,
    /// Paths of fields that were dropped.
    pub ignored: Vec<String>,
}

fn strip_unknown(
    obj: &mut Map<String, Value>,
    known: &[&str],
    prefix: &str,
    out: &mut Vec<String>,
) {
    let unknown: Vec<String> = obj
        .keys()
        .filter(|k| !known.contains(&k.as_str()))
        .cloned()
        .collect();
    for k in unknown {
        obj.remove(&k);
        out.push(format!("{prefix}{k}"));
    }
}

pub fn parse_request(body: &[u8], strict: bool) -> Result<ParsedRequest, ApiError> {
    let mut value: Value =
        serde_json::from_slice(body).map_err(|e| ApiError::new("malformed_json", e.to_string()))?;
    let Some(obj) = value.as_object_mut() else {
        return Err(ApiError::new(
            "malformed_json",
            "request body must be a JSON object",
        ));
    };

    let mut unknown = Vec::new();
    strip_unknown(obj, REQUEST_FIELDS, "", &mut unknown);
    if let Some(Value::Array(legs)) = obj.get_mut("legs") {
        for (i, leg) in legs.iter_mut().enumerate() {
            if let Value::Object(leg) = leg {
                strip_unknown(leg, LEG_FIELDS, &format!("legs[{i}]."), &mut unknown);
            }
        }
    }
    if strict {
        if let Some(first) = unknown.first() {
            return Err(
                ApiError::new("unknown_field", format!("unknown field `{first}`")).at(first),
            );
        }
    }

    match obj.remove("api_version") {
        None => {}
        Some(v) if v.as_u64() == Some(u64::from(API_VERSION)) => {}
        Some(v) => {
            return Err(ApiError::new(
                "unsupported_version",
                format!("api_version {v} is not supported (expected {API_VERSION})"),
            )
            .at("api_version"))
        }
    }

    let doc: RequestDoc = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let err = ApiError::new("invalid_field", e.into_inner().to_string());
        if path == "." {
            err
        } else {
            err.at(path)
        }
    })?;
    Ok(ParsedRequest {
        doc,
        ignored: unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BODY: &str = r#"{"request_id":"r","a_ends":["a"],"candidates":["b"],
        "legs":[{"a_to_b_mbps":1,"b_to_a_mbps":2}],"l_max_ms":10,"util_threshold":0.9}"#;

    #[test]
    fn parses_minimal_body() {
        let p = parse_request(BODY.as_bytes(), true).unwrap();
        assert_eq!(p.doc.request_id, "r");
        assert_eq!(p.doc.failure_sets, vec!["none"]);
        assert!(p.ignored.is_empty());
    }

    #[test]
    fn unknown_fields_by_mode() {
        let body = BODY
            .replace(r#""b_to_a_mbps":2}"#, r#""b_to_a_mbps":2,"qos":"gold"}"#)
            .replace(r#""request_id""#, r#""colour":"red","request_id""#);
        let err = parse_request(body.as_bytes(), true).unwrap_err();
        assert_eq!(err.code, "unknown_field");
        assert_eq!(err.field.as_deref(), Some("colour"));

        let p = parse_request(body.as_bytes(), false).unwrap();
        assert_eq!(p.ignored, vec!["colour", "legs[0].qos"]);
        assert_eq!(p.doc, parse_request(BODY.as_bytes(), true).unwrap().doc);
    }

    #[test]
    fn reports_paths_and_versions() {
        let err = parse_request(b"{not json", true).unwrap_err();
        assert_eq!(err.code, "malformed_json");

        let body = BODY.replace(r#""a_to_b_mbps":1"#, r#""a_to_b_mbps":"fast""#);
        let err = parse_request(body.as_bytes(), true).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("legs[0].a_to_b_mbps"));

        let body = BODY.replace(r#"{"request_id""#, r#"{"api_version":2,"request_id""#);
        assert_eq!(
            parse_request(body.as_bytes(), true).unwrap_err().code,
            "unsupported_version"
        );
        let body = BODY.replace(r#"{"request_id""#, r#"{"api_version":1,"request_id""#);
        assert!(parse_request(body.as_bytes(), true).is_ok());

        assert_eq!(
            parse_request(b"[1]", true).unwrap_err().code,
            "malformed_json"
        );
    }
}
