//! Machine-readable command reports. The result payload and its digest are
//! deterministic; timing is recorded beside them and is not digested.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dsl::digest;
use crate::error::Limits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Invalid,
    CapExceeded,
    Internal,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Invalid => 2,
            Status::CapExceeded => 3,
            Status::Internal => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    /// SHA-256 of the file as read.
    pub sha256: String,
    /// SHA-256 of the canonical text, when the file elaborated.
    pub canonical_sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub largest_hom_set: usize,
    pub largest_fiber: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub status: Status,
    pub exit_code: i32,
    pub result: Value,
    pub result_sha256: String,
    pub limits: Limits,
    pub usage: Option<Usage>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(command: Vec<String>, status: Status, result: Value, limits: Limits) -> Report {
        let result_sha256 = digest(&serde_json::to_string(&result).expect("values serialize"));
        Report {
            command,
            inputs: Vec::new(),
            status,
            exit_code: status.exit_code(),
            result,
            result_sha256,
            limits,
            usage: None,
            elapsed_ms: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let mut r = Report::new(vec!["check".into(), "--stack".into()], Status::Fail, serde_json::json!({"stack": false}), Limits::default());
        r.inputs.push(InputDigest { path: "x.site".into(), sha256: digest("x"), canonical_sha256: None });
        r.usage = Some(Usage { largest_hom_set: 2, largest_fiber: 3 });
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&s).unwrap(), r);
        assert_eq!(r.exit_code, 1);
    }

    #[test]
    fn result_digest_ignores_timing() {
        let a = Report::new(vec![], Status::Pass, serde_json::json!([1, 2]), Limits::default());
        let mut b = a.clone();
        b.elapsed_ms = 99;
        assert_eq!(a.result_sha256, b.result_sha256);
    }
}
