//! Harvest loop: query a plan generator over a task list, verify every
//! generated plan against the system's specifications, keep the all-pass
//! plans as supervised fine-tuning data, and report per-specification pass
//! rates.

mod client;

pub use client::{
    GenRequest, GeneratorClient, GeneratorError, HttpGenerator, MockGenerator, TemplateFamily,
    API_KEY_ENV,
};

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::SystemTime;

use serde::Serialize;
use thiserror::Error;

use crate::checker::{verify_all, Verdict};
use crate::plan::{parse_plan, resolve_plan};
use crate::compile::tree2fsa;
use crate::system::{build_transition_system, SystemSpec};

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("no records to analyze")]
    EmptyInput,
    #[error("refusing to write an empty dataset (pass allow_empty to override)")]
    EmptyDataset,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("system error: {0}")]
    System(#[from] crate::system::SystemError),
    #[error("checker error: {0}")]
    Check(#[from] crate::checker::CheckError),
    #[error("dataset line {line}: {msg}")]
    InvalidDataset { line: usize, msg: String },
}

/// Outcome of one generation attempt.
#[derive(Debug, Clone)]
pub struct GenerationRecord {
    pub task: String,
    pub seed: u64,
    /// None when the endpoint hard-failed for this sample.
    pub plan_text: Option<String>,
    pub generation_error: Option<String>,
    pub parse_ok: bool,
    /// Per-spec verdicts, present only when the plan parsed.
    pub verdicts: Vec<(String, bool)>,
    pub timestamp: SystemTime,
}

impl GenerationRecord {
    pub fn all_pass(&self) -> bool {
        self.parse_ok && !self.verdicts.is_empty() && self.verdicts.iter().all(|(_, ok)| *ok)
    }
}

/// A (prompt, safety-constrained plan) pair destined for fine-tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    /// Task text prefixed with the API description block.
    pub prompt: String,
    /// The plan verbatim.
    pub completion: String,
    pub api_description: String,
    pub task: String,
}

#[derive(Debug)]
pub struct HarvestOutcome {
    pub records: Vec<GenerationRecord>,
    pub dataset: Vec<DatasetEntry>,
    /// Itemized endpoint hard-failures (task, seed, error).
    pub failures: Vec<(String, u64, String)>,
}

#[derive(Debug, Clone)]
pub struct HarvestConfig {
    pub seeds_per_task: u64,
    pub temperature: f64,
    pub parallelism: usize,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        HarvestConfig {
            seeds_per_task: 1,
            temperature: 0.7,
            parallelism: 4,
        }
    }
}

fn spec_names(system: &SystemSpec) -> Vec<String> {
    (1..=system.specs.len()).map(|i| format!("phi{i}")).collect()
}

/// Generates `seeds_per_task` plans per task, verifies each against every
/// system specification, and keeps the all-pass plans as dataset entries.
/// Generation failures are recorded, never silently dropped. Records are
/// ordered by (task index, seed) regardless of completion order.
pub fn harvest(
    client: &dyn GeneratorClient,
    system: &SystemSpec,
    tasks: &[String],
    config: &HarvestConfig,
) -> Result<HarvestOutcome, HarvestError> {
    assert!(!tasks.is_empty(), "tasks must be nonempty");
    assert!(config.seeds_per_task >= 1);

    let ts = build_transition_system(system)?;
    let specs: Vec<_> = system.specs.iter().map(|(_, f)| f.clone()).collect();
    let names = spec_names(system);
    let api = system.api_description();

    let jobs: Vec<(usize, String, u64)> = tasks
        .iter()
        .enumerate()
        .flat_map(|(ti, task)| {
            (0..config.seeds_per_task).map(move |seed| (ti, task.clone(), seed))
        })
        .collect();

    let results: Mutex<Vec<Option<GenerationRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let next_job = std::sync::atomic::AtomicUsize::new(0);
    let workers = config.parallelism.max(1).min(jobs.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next_job.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if idx >= jobs.len() {
                    break;
                }
                let (_, task, seed) = &jobs[idx];
                let record = run_one(client, system, &ts, &specs, &names, &api, task, *seed);
                results.lock().unwrap()[idx] = Some(record);
            });
        }
    });

    let records: Vec<GenerationRecord> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect();

    let failures = records
        .iter()
        .filter_map(|r| {
            r.generation_error
                .as_ref()
                .map(|e| (r.task.clone(), r.seed, e.clone()))
        })
        .collect();

    let dataset = records
        .iter()
        .filter(|r| r.all_pass())
        .map(|r| DatasetEntry {
            prompt: format!("{api}\nTask: {}", r.task),
            completion: r.plan_text.clone().expect("all-pass record has text"),
            api_description: api.clone(),
            task: r.task.clone(),
        })
        .collect();

    Ok(HarvestOutcome {
        records,
        dataset,
        failures,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    client: &dyn GeneratorClient,
    system: &SystemSpec,
    ts: &crate::system::TransitionSystem,
    specs: &[crate::formula::SafetyFormula],
    names: &[String],
    api: &str,
    task: &str,
    seed: u64,
) -> GenerationRecord {
    let request = GenRequest {
        system: api.to_string(),
        user: task.to_string(),
        seed,
        temperature: 0.7,
    };
    let timestamp = SystemTime::now();
    let text = match client.generate(&request) {
        Ok(t) => t,
        Err(e) => {
            return GenerationRecord {
                task: task.to_string(),
                seed,
                plan_text: None,
                generation_error: Some(e.to_string()),
                parse_ok: false,
                verdicts: Vec::new(),
                timestamp,
            }
        }
    };
    let (parse_ok, verdicts) = match parse_plan(&text) {
        Err(_) => (false, Vec::new()),
        Ok(plan) => {
            let resolved = resolve_plan(&plan, system);
            let fsa = tree2fsa(&resolved).fsa;
            match verify_all(&fsa, ts, specs) {
                Ok(vs) => (
                    true,
                    names
                        .iter()
                        .cloned()
                        .zip(vs.iter().map(Verdict::passed))
                        .collect(),
                ),
                Err(_) => (false, Vec::new()),
            }
        }
    };
    GenerationRecord {
        task: task.to_string(),
        seed,
        plan_text: Some(text),
        generation_error: None,
        parse_ok,
        verdicts,
        timestamp,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsRow {
    pub spec: String,
    pub passes: usize,
    pub total: usize,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub samples: usize,
    pub parse_failures: usize,
    pub parse_failure_rate: f64,
    pub rows: Vec<StatsRow>,
}

/// Per-spec pass fractions over the parse-ok records, plus the parse
/// failure rate.
pub fn stats(records: &[GenerationRecord]) -> Result<StatsReport, HarvestError> {
    if records.is_empty() {
        return Err(HarvestError::EmptyInput);
    }
    let samples = records.len();
    let parse_failures = records.iter().filter(|r| !r.parse_ok).count();
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.parse_ok) {
        for (spec, ok) in &r.verdicts {
            let entry = counts.entry(spec.clone()).or_insert((0, 0));
            entry.1 += 1;
            if *ok {
                entry.0 += 1;
            }
        }
    }
    let rows = counts
        .into_iter()
        .map(|(spec, (passes, total))| StatsRow {
            spec,
            passes,
            total,
            pass_rate: passes as f64 / total as f64,
        })
        .collect();
    Ok(StatsReport {
        samples,
        parse_failures,
        parse_failure_rate: parse_failures as f64 / samples as f64,
        rows,
    })
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples        {:>8}", self.samples)?;
        writeln!(
            f,
            "parse-failure  {:>8.3}  ({}/{})",
            self.parse_failure_rate, self.parse_failures, self.samples
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<14} {:>8.3}  ({}/{})",
                row.spec, row.pass_rate, row.passes, row.total
            )?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatLine<'a> {
    messages: [ChatMessage<'a>; 3],
}

/// Writes the dataset as JSON Lines in the chat supervised-fine-tuning
/// layout: system = API description, user = task, assistant = plan.
/// Byte-stable for a fixed dataset.
pub fn emit_dataset(
    dataset: &[DatasetEntry],
    path: impl AsRef<Path>,
    allow_empty: bool,
) -> Result<(), HarvestError> {
    if dataset.is_empty() && !allow_empty {
        return Err(HarvestError::EmptyDataset);
    }
    let mut w = BufWriter::new(File::create(path)?);
    for entry in dataset {
        let line = ChatLine {
            messages: [
                ChatMessage {
                    role: "system",
                    content: &entry.api_description,
                },
                ChatMessage {
                    role: "user",
                    content: &entry.task,
                },
                ChatMessage {
                    role: "assistant",
                    content: &entry.completion,
                },
            ],
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Validates a dataset file against the documented schema; returns the
/// number of entries.
pub fn validate_dataset(path: impl AsRef<Path>) -> Result<usize, HarvestError> {
    let reader = BufReader::new(File::open(path)?);
    let mut count = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let bad = |msg: &str| HarvestError::InvalidDataset {
            line: n,
            msg: msg.to_string(),
        };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| bad(&format!("not JSON: {e}")))?;
        let messages = value
            .get("messages")
            .and_then(|m| m.as_array())
            .ok_or_else(|| bad("missing messages array"))?;
        if messages.len() != 3 {
            return Err(bad("expected exactly 3 messages"));
        }
        for (msg, want_role) in messages.iter().zip(["system", "user", "assistant"]) {
            let role = msg.get("role").and_then(|r| r.as_str());
            if role != Some(want_role) {
                return Err(bad(&format!("expected role {want_role:?}, got {role:?}")));
            }
            let content = msg.get("content").and_then(|c| c.as_str()).unwrap_or("");
            if content.is_empty() {
                return Err(bad("empty message content"));
            }
        }
        count += 1;
    }
    Ok(count)
}

/// Reads a task file: one task per line, blank lines skipped.
pub fn read_tasks(path: impl AsRef<Path>) -> Result<Vec<String>, HarvestError> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.to_string())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn driving_system() -> SystemSpec {
        SystemSpec::from_json(
            r#"{
              "functions": [
                {"name": "pedestrian_observed", "kind": "subscribing", "doc": "True when a pedestrian is visible."},
                {"name": "velocity_publisher", "kind": "execution", "doc": "Publishes velocity."},
                {"name": "stop", "kind": "execution", "doc": "Stops the robot."}
              ],
              "propositions": [
                {"name": "pedestrian", "kind": "sensor"},
                {"name": "publish velocity", "kind": "exec"},
                {"name": "stop", "kind": "exec"}
              ],
              "mappings": [
                {"function": "pedestrian_observed", "args": ["*"], "prop": "pedestrian"},
                {"function": "velocity_publisher", "args": ["*"], "prop": "publish velocity"},
                {"function": "stop", "args": ["*"], "prop": "stop"}
              ],
              "specs": ["G( \"pedestrian\" -> X !\"publish velocity\" )"]
            }"#,
        )
        .unwrap()
    }

    fn tasks(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("driving task {i}")).collect()
    }

    #[test]
    fn all_safe_mock_fills_the_dataset() {
        let client = MockGenerator::with_safe_ratio(TemplateFamily::Driving, 1.0, 1);
        let system = driving_system();
        let outcome = harvest(
            &client,
            &system,
            &tasks(10),
            &HarvestConfig {
                seeds_per_task: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 100);
        assert_eq!(outcome.dataset.len(), 100);
        assert!(outcome.failures.is_empty());
    }

    #[test]
    fn all_unsafe_mock_keeps_records_but_no_entries() {
        let client = MockGenerator::with_safe_ratio(TemplateFamily::Driving, 0.0, 1);
        let system = driving_system();
        let outcome = harvest(
            &client,
            &system,
            &tasks(10),
            &HarvestConfig {
                seeds_per_task: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 100);
        assert_eq!(outcome.dataset.len(), 0);
    }

    #[test]
    fn records_are_ordered_by_task_then_seed() {
        let client = MockGenerator::with_safe_ratio(TemplateFamily::Driving, 0.5, 3);
        let system = driving_system();
        let outcome = harvest(
            &client,
            &system,
            &tasks(4),
            &HarvestConfig {
                seeds_per_task: 3,
                parallelism: 4,
                ..Default::default()
            },
        )
        .unwrap();
        let order: Vec<(String, u64)> = outcome
            .records
            .iter()
            .map(|r| (r.task.clone(), r.seed))
            .collect();
        let mut expect = Vec::new();
        for t in tasks(4) {
            for s in 0..3 {
                expect.push((t.clone(), s));
            }
        }
        assert_eq!(order, expect);
    }

    #[test]
    fn stats_reports_rates_and_parse_failures() {
        let client = MockGenerator::with_safe_ratio(TemplateFamily::Driving, 1.0, 5)
            .with_malformed_ratio(1.0);
        let system = driving_system();
        let outcome = harvest(
            &client,
            &system,
            &tasks(3),
            &HarvestConfig {
                seeds_per_task: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let report = stats(&outcome.records).unwrap();
        assert_eq!(report.parse_failure_rate, 1.0);
        assert!(report.rows.is_empty());
        assert!(stats(&[]).is_err());
    }

    #[test]
    fn mock_ratio_reproduces_within_tolerance() {
        let client = MockGenerator::with_safe_ratio(TemplateFamily::Driving, 0.5, 5);
        let system = driving_system();
        let outcome = harvest(
            &client,
            &system,
            &tasks(40),
            &HarvestConfig {
                seeds_per_task: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let report = stats(&outcome.records).unwrap();
        let phi1 = report.rows.iter().find(|r| r.spec == "phi1").unwrap();
        assert!(
            (phi1.pass_rate - 0.5).abs() <= 0.05,
            "rate {} out of tolerance",
            phi1.pass_rate
        );
        // Dataset purity: every emitted entry passes every spec.
        for entry in &outcome.dataset {
            let plan = parse_plan(&entry.completion).unwrap();
            let resolved = resolve_plan(&plan, &system);
            let fsa = tree2fsa(&resolved).fsa;
            let ts = build_transition_system(&system).unwrap();
            let specs: Vec<_> = system.specs.iter().map(|(_, f)| f.clone()).collect();
            let verdicts = verify_all(&fsa, &ts, &specs).unwrap();
            assert!(verdicts.iter().all(|v| v.passed()));
        }
    }

    #[test]
    fn endpoint_failures_are_itemized_not_dropped() {
        struct Flaky;
        impl GeneratorClient for Flaky {
            fn generate(&self, request: &GenRequest) -> Result<String, GeneratorError> {
                if request.seed % 2 == 1 {
                    Err(GeneratorError::EndpointUnreachable {
                        attempts: 3,
                        last: "connection refused".into(),
                    })
                } else {
                    Ok("def t():\n    pass\n".into())
                }
            }
        }
        let outcome = harvest(
            &Flaky,
            &driving_system(),
            &tasks(3),
            &HarvestConfig {
                seeds_per_task: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 12);
        assert_eq!(outcome.failures.len(), 6);
        for r in &outcome.records {
            if r.seed % 2 == 1 {
                assert!(r.plan_text.is_none());
                assert!(r.generation_error.is_some());
            } else {
                assert!(r.parse_ok);
            }
        }
    }

    #[test]
    fn dataset_emission_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let entries = vec![
            DatasetEntry {
                prompt: "api\nTask: t1".into(),
                completion: "def a():\n    pass\n".into(),
                api_description: "api".into(),
                task: "t1".into(),
            },
            DatasetEntry {
                prompt: "api\nTask: t2".into(),
                completion: "def b():\n    pass\n".into(),
                api_description: "api".into(),
                task: "t2".into(),
            },
        ];
        emit_dataset(&entries, &path, false).unwrap();
        assert_eq!(validate_dataset(&path).unwrap(), 2);
        let first = std::fs::read(&path).unwrap();
        emit_dataset(&entries, &path, false).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        assert!(matches!(
            emit_dataset(&[], dir.path().join("e.jsonl"), false),
            Err(HarvestError::EmptyDataset)
        ));
        emit_dataset(&[], dir.path().join("e.jsonl"), true).unwrap();
    }

    #[test]
    fn validator_rejects_wrong_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"messages\":[{\"role\":\"user\",\"content\":\"x\"}]}\n").unwrap();
        assert!(matches!(
            validate_dataset(&path),
            Err(HarvestError::InvalidDataset { line: 1, .. })
        ));
    }
}
