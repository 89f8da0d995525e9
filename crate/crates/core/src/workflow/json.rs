//! Native JSON workflow format.
//!
//! ```json
//! {"tasks": [{"id": "a", "workload": 12.5, "label": "prep"}],
//!  "edges": [{"from": "a", "to": "b", "bytes": 1000}]}
//! ```

use serde::{Deserialize, Serialize, Serializer};

use super::{DataEdge, Task, Workflow, WorkflowError};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    tasks: Vec<Task>,
    #[serde(default)]
    edges: Vec<DataEdge>,
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    tasks: &'a [Task],
    edges: Vec<EdgeRef<'a>>,
}

#[derive(Serialize)]
struct EdgeRef<'a> {
    from: &'a str,
    to: &'a str,
    #[serde(serialize_with = "integral_bytes")]
    bytes: f64,
}

/// Byte counts are written as JSON integers whenever they are whole numbers.
fn integral_bytes<S: Serializer>(bytes: &f64, s: S) -> Result<S::Ok, S::Error> {
    if bytes.fract() == 0.0 && *bytes >= 0.0 && *bytes < 9_007_199_254_740_992.0 {
        s.serialize_u64(*bytes as u64)
    } else {
        s.serialize_f64(*bytes)
    }
}

pub fn parse_json(text: &str) -> Result<Workflow, WorkflowError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| WorkflowError::MalformedInput {
        position: format!("line {}, column {}", e.line(), e.column()),
        reason: e.to_string(),
    })?;
    Workflow::validate(doc.tasks, doc.edges)
}

pub fn to_json(workflow: &Workflow) -> String {
    let doc = DocumentRef {
        tasks: workflow.tasks(),
        edges: workflow
            .edges()
            .iter()
            .map(|e| EdgeRef {
                from: &e.from,
                to: &e.to,
                bytes: e.bytes,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("workflow serialization is infallible")
}
