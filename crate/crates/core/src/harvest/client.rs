//! Plan-generator clients: an HTTP chat-completions client and a seeded
//! deterministic mock for hermetic runs.

use std::env;
use std::time::Duration;

use log::debug;
use serde_json::json;
use thiserror::Error;

/// Environment variable holding the API token for the HTTP client.
pub const API_KEY_ENV: &str = "PLANCHECK_API_KEY";

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("endpoint unreachable after {attempts} attempts: {last}")]
    EndpointUnreachable { attempts: u32, last: String },
    #[error("malformed endpoint response: {0}")]
    BadResponse(String),
}

/// One generation request: the API-description block plays the system role,
/// the task the user role.
#[derive(Debug, Clone)]
pub struct GenRequest {
    pub system: String,
    pub user: String,
    pub seed: u64,
    pub temperature: f64,
}

pub trait GeneratorClient: Send + Sync {
    fn generate(&self, request: &GenRequest) -> Result<String, GeneratorError>;
}

/// Chat-completions HTTP client. The auth token is read from
/// `PLANCHECK_API_KEY`; request and response bodies are logged at debug
/// level with the token redacted.
pub struct HttpGenerator {
    base_url: String,
    model: String,
    token: Option<String>,
    max_retries: u32,
    timeout: Duration,
}

impl HttpGenerator {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> HttpGenerator {
        HttpGenerator {
            base_url: base_url.into(),
            model: model.into(),
            token: env::var(API_KEY_ENV).ok(),
            max_retries: 2,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn with_retries(mut self, max_retries: u32) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl GeneratorClient for HttpGenerator {
    fn generate(&self, request: &GenRequest) -> Result<String, GeneratorError> {
        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "seed": request.seed,
        });
        debug!("POST {url} body={body} authorization=<redacted>");

        let attempts = self.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(50 << attempt));
            }
            let agent: ureq::Agent = ureq::Agent::config_builder()
                .timeout_global(Some(self.timeout))
                .build()
                .into();
            let mut req = agent.post(&url).header("content-type", "application/json");
            if let Some(token) = &self.token {
                req = req.header("authorization", &format!("Bearer {token}"));
            }
            match req.send_json(&body) {
                Ok(mut resp) => {
                    let value: serde_json::Value =
                        resp.body_mut().read_json().map_err(|e| {
                            GeneratorError::BadResponse(format!("invalid JSON: {e}"))
                        })?;
                    debug!("response={value}");
                    let content = value["choices"][0]["message"]["content"]
                        .as_str()
                        .ok_or_else(|| {
                            GeneratorError::BadResponse(
                                "missing choices[0].message.content".into(),
                            )
                        })?;
                    return Ok(content.to_string());
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(GeneratorError::EndpointUnreachable { attempts, last })
    }
}

/// Plan-template families the mock can draw from, one per fixture system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateFamily {
    /// Outdoor driving: pedestrian/car/stop-sign sensors, stop and
    /// velocity-publisher actions. Three tunable specification knobs.
    Driving,
    /// Indoor fetch: person/backpack sensors, ask/go actions. One knob.
    Fetch,
    /// Robot dog: person/target sensors, navigate/stop/signal actions.
    /// Three knobs.
    RobotDog,
}

impl TemplateFamily {
    pub fn knob_count(self) -> usize {
        match self {
            TemplateFamily::Driving | TemplateFamily::RobotDog => 3,
            TemplateFamily::Fetch => 1,
        }
    }
}

/// Deterministic template sampler: identical (system prompt, task, seed)
/// always yields identical text. Each knob is the probability that the
/// generated plan satisfies the corresponding specification; knobs draw
/// independently and the template matching the drawn violation set is
/// instantiated.
pub struct MockGenerator {
    family: TemplateFamily,
    satisfy_ratios: Vec<f64>,
    malformed_ratio: f64,
    base_seed: u64,
}

impl MockGenerator {
    pub fn new(family: TemplateFamily, satisfy_ratios: Vec<f64>, base_seed: u64) -> MockGenerator {
        assert_eq!(
            satisfy_ratios.len(),
            family.knob_count(),
            "one ratio per specification knob"
        );
        MockGenerator {
            family,
            satisfy_ratios,
            malformed_ratio: 0.0,
            base_seed,
        }
    }

    /// Single-knob convenience: probability of an entirely safe plan,
    /// remaining mass on the family's first violation.
    pub fn with_safe_ratio(family: TemplateFamily, ratio: f64, base_seed: u64) -> MockGenerator {
        let mut ratios = vec![1.0; family.knob_count()];
        ratios[0] = ratio;
        MockGenerator::new(family, ratios, base_seed)
    }

    pub fn with_malformed_ratio(mut self, ratio: f64) -> Self {
        self.malformed_ratio = ratio;
        self
    }

    fn template(&self, violations: &[bool], name: &str, rng: &mut SplitMix) -> String {
        match self.family {
            TemplateFamily::Driving => driving_template(violations, name, rng),
            TemplateFamily::Fetch => fetch_template(violations[0], name),
            TemplateFamily::RobotDog => robot_dog_template(violations, name),
        }
    }
}

impl GeneratorClient for MockGenerator {
    fn generate(&self, request: &GenRequest) -> Result<String, GeneratorError> {
        let mut rng = SplitMix::new(
            self.base_seed ^ fnv1a(request.user.as_bytes()) ^ request.seed.wrapping_mul(0x9e37),
        );
        if rng.next_f64() < self.malformed_ratio {
            return Ok("def broken(:\n    pass\n".to_string());
        }
        let violations: Vec<bool> = self
            .satisfy_ratios
            .iter()
            .map(|r| rng.next_f64() >= *r)
            .collect();
        let name = plan_name(&request.user, request.seed);
        Ok(self.template(&violations, &name, &mut rng))
    }
}

fn plan_name(task: &str, seed: u64) -> String {
    let mut base: String = task
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    base.truncate(32);
    let base = base.trim_matches('_').to_string();
    let base = if base.is_empty() { "task".to_string() } else { base };
    format!("{base}_{seed}")
}

fn driving_template(violations: &[bool], name: &str, rng: &mut SplitMix) -> String {
    let linear = ["0.3", "0.5", "0.8"][rng.next_bounded(3)];
    let angular = ["0.0", "-1.2", "0.6"][rng.next_bounded(3)];
    // Arms are arranged so that exactly the drawn specifications break:
    // publishing must re-check pedestrian (1) and car (3); stopping at a
    // bare stop sign breaks (2).
    let mut arms: Vec<(&str, &str)> = Vec::new();
    if !violations[0] {
        arms.push(("pedestrian_observed()", "stop()"));
    }
    if !violations[2] {
        arms.push(("car_observed()", "stop()"));
    }
    if violations[1] {
        arms.push(("stop_sign_observed()", "stop()"));
    }
    let mut body = String::new();
    body.push_str(&format!("def {name}():\n"));
    body.push_str(&format!("    linear = {linear}\n"));
    body.push_str(&format!("    angular = {angular}\n"));
    body.push_str("    while True:\n");
    if arms.is_empty() {
        body.push_str("        velocity_publisher(linear, angular)\n");
    } else {
        for (i, (cond, action)) in arms.iter().enumerate() {
            let kw = if i == 0 { "if" } else { "elif" };
            body.push_str(&format!("        {kw} {cond}:\n"));
            body.push_str(&format!("            {action}\n"));
        }
        body.push_str("        else:\n");
        body.push_str("            velocity_publisher(linear, angular)\n");
    }
    body
}

fn fetch_template(violate: bool, name: &str) -> String {
    if violate {
        format!(
            "def {name}():\n    start_loc = get_current_location()\n    go_to(\"lounge\")\n    if is_in_room(\"backpack\"):\n        while True:\n            if is_in_room(\"person\"):\n                response = ask(\"Could you put my backpack in the basket?\")\n"
        )
    } else {
        format!(
            "def {name}():\n    if is_in_room(\"backpack\") and is_in_room(\"person\"):\n        response = ask(\"Could you put my backpack in the basket?\")\n"
        )
    }
}

fn robot_dog_template(violations: &[bool], name: &str) -> String {
    let body = match (violations[0], violations[1], violations[2]) {
        (false, false, false) => {
            "    while True:\n        if person_observed():\n            stop()\n        elif target_observed():\n            signal()\n        else:\n            navigate()\n"
        }
        (true, false, false) => {
            "    while True:\n        if target_observed():\n            signal()\n        else:\n            navigate()\n"
        }
        (false, true, false) => {
            "    while True:\n        if person_observed():\n            stop()\n        else:\n            navigate()\n"
        }
        (false, false, true) => {
            "    while True:\n        if person_observed():\n            stop()\n        elif target_observed():\n            stop()\n        else:\n            signal()\n"
        }
        (true, true, false) => "    while True:\n        navigate()\n",
        (true, false, true) => {
            "    while True:\n        if person_observed() and target_observed():\n            navigate()\n        else:\n            signal()\n"
        }
        (false, true, true) => {
            "    while True:\n        if person_observed():\n            stop()\n        elif target_observed():\n            navigate()\n        else:\n            signal()\n"
        }
        (true, true, true) => "    while True:\n        navigate()\n        signal()\n",
    };
    format!("def {name}():\n{body}")
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Small deterministic generator (splitmix64); the mock must not depend on
/// hasher or rand internals for cross-run stability.
struct SplitMix {
    state: u64,
}

impl SplitMix {
    fn new(seed: u64) -> SplitMix {
        SplitMix { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn next_bounded(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
