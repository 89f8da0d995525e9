//! Ingestion of the job / uses / child-parent subset of Pegasus DAX files.
//!
//! Task workloads come from each job's `runtime` attribute. Edge sizes are
//! derived from files: when job `i` writes a file that job `j` reads, the full
//! file size is added to `file(i, j)`. Explicit `<child>/<parent>` dependencies
//! are unioned with the file-implied ones (zero bytes when no file links them).

use std::collections::{BTreeMap, HashMap};

use roxmltree::{Document, Node};

use super::{DataEdge, Task, Workflow, WorkflowError};

pub fn parse_dax(xml_text: &str) -> Result<Workflow, WorkflowError> {
    let doc = Document::parse(xml_text).map_err(|e| WorkflowError::MalformedInput {
        position: e.pos().to_string(),
        reason: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "adag" {
        return Err(malformed(&doc, root, format!("expected <adag> root, found <{}>", root.tag_name().name())));
    }

    let mut tasks: Vec<Task> = Vec::new();
    let mut job_index: HashMap<String, usize> = HashMap::new();
    // file name -> (size, writers, readers)
    let mut files: BTreeMap<String, FileUse> = BTreeMap::new();
    let mut deps: Vec<(String, String)> = Vec::new();

    for node in root.children().filter(Node::is_element) {
        match node.tag_name().name() {
            "job" => {
                let id = required(&doc, node, "id")?.to_string();
                let runtime = required(&doc, node, "runtime")?;
                let workload: f64 = runtime.trim().parse().map_err(|_| {
                    malformed(&doc, node, format!("job `{id}` has non-numeric runtime `{runtime}`"))
                })?;
                let job = tasks.len();
                if job_index.insert(id.clone(), job).is_some() {
                    return Err(WorkflowError::DuplicateTask(id));
                }
                let mut task = Task::new(id, workload);
                if let Some(name) = node.attribute("name") {
                    task.label = Some(name.to_string());
                }
                tasks.push(task);

                for child in node.children().filter(Node::is_element) {
                    match child.tag_name().name() {
                        "uses" => record_use(&doc, child, job, &mut files)?,
                        other => {
                            return Err(WorkflowError::UnsupportedFeature(format!(
                                "<{other}> inside <job>"
                            )))
                        }
                    }
                }
            }
            "child" => {
                let child_id = required(&doc, node, "ref")?.to_string();
                for parent in node.children().filter(Node::is_element) {
                    if parent.tag_name().name() != "parent" {
                        return Err(WorkflowError::UnsupportedFeature(format!(
                            "<{}> inside <child>",
                            parent.tag_name().name()
                        )));
                    }
                    let parent_id = required(&doc, parent, "ref")?.to_string();
                    deps.push((parent_id, child_id.clone()));
                }
            }
            other => return Err(WorkflowError::UnsupportedFeature(format!("<{other}>"))),
        }
    }

    // Accumulate bytes per (writer, reader) pair in a deterministic order.
    let mut edge_bytes: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for usage in files.values() {
        for &w in &usage.writers {
            for &r in &usage.readers {
                if w != r {
                    *edge_bytes.entry((w, r)).or_insert(0.0) += usage.size;
                }
            }
        }
    }
    for (parent, child) in &deps {
        let p = *job_index
            .get(parent)
            .ok_or_else(|| WorkflowError::DanglingEdge(parent.clone()))?;
        let c = *job_index
            .get(child)
            .ok_or_else(|| WorkflowError::DanglingEdge(child.clone()))?;
        edge_bytes.entry((p, c)).or_insert(0.0);
    }

    let edges = edge_bytes
        .into_iter()
        .map(|((from, to), bytes)| DataEdge::new(tasks[from].id.clone(), tasks[to].id.clone(), bytes))
        .collect();
    Workflow::validate(tasks, edges)
}

#[derive(Default)]
struct FileUse {
    size: f64,
    writers: Vec<usize>,
    readers: Vec<usize>,
}

fn record_use(
    doc: &Document,
    node: Node,
    job: usize,
    files: &mut BTreeMap<String, FileUse>,
) -> Result<(), WorkflowError> {
    let name = node
        .attribute("file")
        .or_else(|| node.attribute("name"))
        .ok_or_else(|| malformed(doc, node, "<uses> without file name".into()))?;
    let link = required(doc, node, "link")?;
    let size_text = required(doc, node, "size")?;
    let size: f64 = size_text
        .trim()
        .parse()
        .ok()
        .filter(|s: &f64| *s >= 0.0 && s.is_finite())
        .ok_or_else(|| malformed(doc, node, format!("file `{name}` has invalid size `{size_text}`")))?;

    let entry = files.entry(name.to_string()).or_default();
    entry.size = entry.size.max(size);
    match link {
        "input" => entry.readers.push(job),
        "output" => entry.writers.push(job),
        "inout" => return Err(WorkflowError::UnsupportedFeature("link=\"inout\"".into())),
        other => return Err(malformed(doc, node, format!("unknown link direction `{other}`"))),
    }
    Ok(())
}

fn required<'a>(doc: &Document, node: Node<'a, '_>, attr: &str) -> Result<&'a str, WorkflowError> {
    node.attribute(attr).ok_or_else(|| {
        malformed(
            doc,
            node,
            format!("<{}> is missing attribute `{attr}`", node.tag_name().name()),
        )
    })
}

fn malformed(doc: &Document, node: Node, reason: String) -> WorkflowError {
    WorkflowError::MalformedInput {
        position: doc.text_pos_at(node.range().start).to_string(),
        reason,
    }
}
