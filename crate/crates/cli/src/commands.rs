use std::path::Path;

use qconv::algebra::{Element, ElementJson, DEFAULT_RANK_TOL};
use qconv::convolution::{check_associativity, check_good_convolution, Elem, FnVerification};
use qconv::fusion::Verdict;
use qconv::inequality::{
    self, conv_continuity_bound, continuity_bound, InequalityError, InequalityReport, SweepConfig,
    REVERSE_YOUNG_TRIPLES,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::input::{self, InputError, Kind, Loaded};
use crate::output::{self, RunManifest, SCHEMA_VERSION};
use crate::{Cli, Command, Format};

/// Exit code 2 with a message.
pub struct Fail(String);

impl From<InputError> for Fail {
    fn from(e: InputError) -> Self {
        Fail(e.to_string())
    }
}

impl From<InequalityError> for Fail {
    fn from(e: InequalityError) -> Self {
        Fail(e.to_string())
    }
}

type Outcome = Result<(Value, bool), Fail>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn manifest(cli: &Cli) -> RunManifest {
    let g = &cli.global;
    let (command, path) = match &cli.command {
        Command::Validate { path } => ("validate", Some(path)),
        Command::Categorify { path } => ("categorify", Some(path)),
        Command::Axioms { path } => ("axioms", Some(path)),
        Command::Inequalities { path, .. } => ("inequalities", Some(path)),
        Command::Entropy { path, .. } => ("entropy", path.as_ref()),
    };
    RunManifest {
        command: command.into(),
        inputs: path.iter().map(|p| p.display().to_string()).collect(),
        seed: g.seed,
        tol: g.tol,
        budget: g.budget,
        samples: g.samples,
        suite: None,
        theta: None,
        op: None,
        params: None,
        config: None,
        tool_version: env!("CARGO_PKG_VERSION").into(),
    }
}

/// Runs the command, prints or writes its report, and returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let mut m = manifest(cli);
    let res = match &cli.command {
        Command::Validate { path } => validate(path),
        Command::Categorify { path } => categorify(cli, path),
        Command::Axioms { path } => axioms(cli, path),
        Command::Inequalities {
            path,
            suite,
            config,
            theta,
        } => inequalities(cli, &mut m, path, suite, config.as_deref(), *theta),
        Command::Entropy { path, op, params } => entropy(cli, &mut m, path.as_deref(), op, params.as_deref()),
    };
    let (body, violated) = match res {
        Ok(r) => r,
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("manifest".into(), to_value(&m));
    if let Value::Object(o) = body {
        doc.extend(o);
    }
    let doc = Value::Object(doc);
    let text = match cli.global.format {
        Format::Json => output::to_json(&doc),
        Format::Markdown => output::to_markdown(&doc),
    };
    match &cli.global.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    u8::from(violated)
}

fn validate(path: &Path) -> Outcome {
    let v = input::read_json(path)?;
    let kind = input::detect(&v)?;
    let checked = |res: Result<Value, InputError>| -> Outcome {
        match res {
            Ok(details) => Ok((json!({"kind": kind.name(), "passed": true, "details": details}), false)),
            Err(InputError::Invariant(msg)) => {
                eprintln!("validation failed: {msg}");
                Ok((json!({"kind": kind.name(), "passed": false, "failures": [msg]}), true))
            }
            Err(e) => Err(e.into()),
        }
    };
    match kind {
        Kind::Ring => {
            let ring = input::ring(&v)?;
            let rep = ring.validate();
            for f in &rep.failures {
                eprintln!("{f}");
            }
            let failing: Vec<String> = rep.failing_identities().iter().map(|i| format!("{i:?}")).collect();
            let mut body = json!({"kind": kind.name(), "passed": rep.passed, "failing_identities": failing, "report": rep});
            if rep.passed {
                if let Ok(fp) = ring.fp_dimensions() {
                    body["fp_dimensions"] = to_value(&fp);
                }
            }
            Ok((body, !rep.passed))
        }
        Kind::Group => checked(input::group(&v).map(|g| json!({"order": g.order(), "abelian": g.is_abelian()}))),
        Kind::Spec => checked(input::spec(&v).map(|s| {
            json!({"blocks": s.num_blocks(), "dimension": s.coord_dim(), "fp_dimension": s.fp_dim(),
                   "min_projection_trace": s.min_projection_trace()})
        })),
        Kind::Structure => checked(input::structure(&v).and_then(|j| {
            let (s, rho) = j.into_parts().map_err(|e| InputError::Invariant(e.to_string()))?;
            Ok(json!({"dimension": s.spec().coord_dim(), "k": s.k(), "entries": s.entries().len(),
                      "antipode": rho.is_some()}))
        })),
    }
}

fn categorify(cli: &Cli, path: &Path) -> Outcome {
    let v = input::read_json(path)?;
    if input::detect(&v)? != Kind::Ring {
        return Err(Fail("categorify expects a fusion ring".into()));
    }
    let ring = input::ring(&v)?;
    let rep = ring.validate();
    if let Some(f) = rep.failures.first() {
        return Err(Fail(format!("not a fusion ring: {f}")));
    }
    let g = &cli.global;
    let fp = ring.fp_dimensions().map_err(|e| Fail(e.to_string()))?;
    let comult = ring
        .search_comult_violation(g.budget, g.seed)
        .map_err(|e| Fail(e.to_string()))?;
    let schur = ring
        .search_schur_violation(g.budget, g.seed)
        .map_err(|e| Fail(e.to_string()))?;
    let obstructed = comult.verdict == Verdict::Violation || schur.verdict == Verdict::Violation;
    for c in [&comult, &schur] {
        if c.verdict == Verdict::Violation {
            eprintln!("obstruction: {} value {:e}", c.criterion, c.value);
        }
    }
    let conclusion = if obstructed {
        "obstruction certified: the ring admits no unitary categorification"
    } else {
        "no obstruction found within budget"
    };
    Ok((
        json!({"fp_dimensions": fp, "criteria": [comult, schur], "obstructed": obstructed, "conclusion": conclusion}),
        obstructed,
    ))
}

fn axioms(cli: &Cli, path: &Path) -> Outcome {
    let g = &cli.global;
    let v = input::read_json(path)?;
    let (kind, loaded) = input::load_algebra(&v, g.samples, g.seed, g.tol)?;
    let s = loaded.structure();
    let (checks, passed, note) = match &loaded {
        Loaded::Fn(f) => {
            let ver = FnVerification::run(s, f.antipode(), g.samples, g.seed, g.tol);
            let mut checks: Vec<Value> = ver.axiom_checks().map(to_value).collect();
            checks.push(to_value(&ver.associativity));
            (checks, ver.passed, None)
        }
        Loaded::Plain { antipode, note, .. } => {
            let good = check_good_convolution(s, g.samples, g.seed, g.tol);
            let mut checks: Vec<Value> = good.checks.iter().map(to_value).collect();
            let mut passed = good.passed;
            if let Some(rho) = antipode {
                let fr = qconv::convolution::check_frobenius(s, rho, g.samples, g.seed, g.tol);
                passed &= fr.passed;
                checks.push(to_value(&fr));
                for c in qconv::convolution::check_antipode(s.spec(), rho, g.samples, g.seed, g.tol) {
                    passed &= c.passed;
                    checks.push(to_value(&c));
                }
            }
            checks.push(to_value(&check_associativity(s, g.samples, g.seed, g.tol)));
            (checks, passed, note.clone())
        }
    };
    for c in &checks {
        if c["passed"] == json!(false) && c["axiom"] != json!("associativity") {
            eprintln!("axiom fails: {} (worst {})", c["axiom"], c["worst"]);
        }
    }
    let mut body = json!({
        "kind": kind.name(),
        "dimension": s.spec().coord_dim(),
        "k": s.k(),
        "fn_algebra": matches!(loaded, Loaded::Fn(_)),
        "checks": checks,
        "passed": passed,
        "associativity_is_informational": true,
    });
    if let Some(n) = note {
        body["note"] = json!(n);
    }
    Ok((body, !passed))
}

const SUITES: [&str; 6] = ["young", "reverse-young", "sumset", "qeci", "continuity", "conv-continuity"];

fn sweep_config(cli: &Cli, path: Option<&Path>) -> Result<(SweepConfig, Option<Value>), Fail> {
    let g = &cli.global;
    let base = SweepConfig {
        samples: g.samples,
        seed: g.seed,
        tol: g.tol,
        ..SweepConfig::default()
    };
    let Some(p) = path else { return Ok((base, None)) };
    let overlay = input::read_json(p)?;
    let Value::Object(o) = &overlay else {
        return Err(Fail("sweep configuration must be a JSON object".into()));
    };
    let mut merged = to_value(&base);
    for (k, v) in o {
        if merged.get(k).is_none() {
            return Err(Fail(format!("unknown sweep configuration key {k:?}")));
        }
        merged[k] = v.clone();
    }
    let cfg: SweepConfig = serde_json::from_value(merged).map_err(|e| Fail(format!("bad sweep configuration: {e}")))?;
    cfg.validate()?;
    Ok((cfg, Some(overlay)))
}

fn inequalities(
    cli: &Cli,
    m: &mut RunManifest,
    path: &Path,
    suite: &str,
    config: Option<&Path>,
    theta: Option<f64>,
) -> Outcome {
    let suites: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(Fail(format!(
                "unknown suite {other:?}; expected one of {} or all",
                SUITES.join(", ")
            )))
        }
    };
    m.suite = Some(suite.into());
    m.theta = theta;
    let (cfg, overlay) = sweep_config(cli, config)?;
    m.config = overlay;
    let v = input::read_json(path)?;
    let (kind, loaded) = input::load_algebra(&v, cfg.samples, cfg.seed, cfg.tol)?;
    let a = loaded.as_algebra();
    let mut reports: Vec<InequalityReport> = Vec::new();
    for s in suites {
        let rep = match s {
            "young" => inequality::young_sweep(a, &cfg)?,
            "reverse-young" => inequality::reverse_young2_sweep(a, &REVERSE_YOUNG_TRIPLES, &cfg)?,
            "sumset" => inequality::sumset_sweep(a, DEFAULT_RANK_TOL, &cfg)?,
            "qeci" => match theta {
                Some(t) => inequality::qeci_weighted_sweep(a, t, &cfg)?,
                None => inequality::qeci_sweep(a, &cfg)?,
            },
            "continuity" => inequality::continuity_sweep(a, 1.0, &cfg)?,
            _ => inequality::conv_continuity_sweep(a, 1.0, &cfg)?,
        };
        if rep.verdict == Verdict::Violation {
            if let Some(w) = &rep.worst {
                eprintln!("violation: {} (lhs {:e}, rhs {:e}, slack {:e})", w.case.label(), w.lhs, w.rhs, w.slack);
            }
        }
        reports.push(rep);
    }
    let violated = reports.iter().any(|r| r.verdict == Verdict::Violation);
    let mut body = json!({
        "kind": kind.name(),
        "fn_algebra": matches!(loaded, Loaded::Fn(_)),
        "config": cfg,
        "reports": reports,
        "passed": !violated,
    });
    if let Loaded::Plain { note: Some(n), .. } = &loaded {
        body["note"] = json!(n);
    }
    Ok((body, violated))
}

/// `key=value,...` or JSON (inline or from a file).
fn parse_params(raw: Option<&str>) -> Result<Map<String, Value>, Fail> {
    let Some(raw) = raw else { return Ok(Map::new()) };
    let t = raw.trim();
    let v: Value = if t.starts_with('{') {
        serde_json::from_str(t).map_err(|e| Fail(format!("bad --params JSON: {e}")))?
    } else if Path::new(t).is_file() {
        input::read_json(Path::new(t))?
    } else {
        let mut o = Map::new();
        for kv in t.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, val) = kv
                .split_once('=')
                .ok_or_else(|| Fail(format!("bad --params entry {kv:?}; expected key=value")))?;
            let val = val.trim();
            let parsed = val
                .parse::<f64>()
                .map(|x| json!(x))
                .unwrap_or_else(|_| json!(val));
            o.insert(k.trim().to_string(), parsed);
        }
        Value::Object(o)
    };
    match v {
        Value::Object(o) => Ok(o),
        _ => Err(Fail("--params must be a JSON object".into())),
    }
}

struct Params {
    map: Map<String, Value>,
    used: Vec<&'static str>,
}

impl Params {
    fn key(&self, names: &[&'static str]) -> Option<&Value> {
        names.iter().find_map(|n| self.map.get(*n))
    }

    fn num(&mut self, names: &[&'static str], default: Option<f64>) -> Result<f64, Fail> {
        self.used.extend_from_slice(names);
        match self.key(names) {
            None => default.ok_or_else(|| Fail(format!("missing parameter {}", names[0]))),
            Some(Value::Number(n)) => Ok(n.as_f64().unwrap_or(f64::NAN)),
            Some(Value::String(s)) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") => {
                Ok(f64::INFINITY)
            }
            Some(other) => Err(Fail(format!("parameter {} must be a number, got {other}", names[0]))),
        }
    }

    fn element(&mut self, name: &'static str) -> Result<Option<ElementJson>, Fail> {
        self.used.push(name);
        self.map
            .get(name)
            .map(|v| serde_json::from_value(v.clone()).map_err(|e| Fail(format!("bad element {name}: {e}"))))
            .transpose()
    }

    fn finish(&self) -> Result<(), Fail> {
        match self.map.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(k) => Err(Fail(format!("unknown parameter {k:?}"))),
            None => Ok(()),
        }
    }
}

/// A given element, or a random PSD element of trace `1/k`.
fn element_or_random(
    p: &mut Params,
    name: &'static str,
    loaded: &Loaded,
    seed: u64,
    index: u64,
) -> Result<Elem, Fail> {
    let s = loaded.structure();
    match p.element(name)? {
        Some(j) => j.to_element(s.spec()).map_err(|e| Fail(format!("element {name}: {e}"))),
        None => Ok(Element::random_density(s.spec(), seed, index, 1.0 / s.k())),
    }
}

fn entropy(cli: &Cli, m: &mut RunManifest, path: Option<&Path>, op: &str, raw: Option<&str>) -> Outcome {
    const OPS: [&str; 6] = ["smooth", "smooth-entropy", "smooth-conv", "continuity", "conv-continuity", "tlogt"];
    if !OPS.contains(&op) {
        return Err(Fail(format!("unknown op {op:?}; expected one of {}", OPS.join(", "))));
    }
    let g = &cli.global;
    let map = parse_params(raw)?;
    m.op = Some(op.into());
    m.params = Some(Value::Object(map.clone()));
    let mut p = Params { map, used: Vec::new() };
    if op == "tlogt" {
        let (s, t, r) = (p.num(&["s"], None)?, p.num(&["t"], None)?, p.num(&["r"], None)?);
        p.finish()?;
        let (lhs, rhs) = inequality::tlogt_bound(s, t, r)?;
        return Ok((json!({"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + 1e-12}), lhs > rhs + 1e-12));
    }
    let path = path.ok_or_else(|| Fail(format!("op {op} needs an algebra input")))?;
    let v = input::read_json(path)?;
    let (kind, loaded) = input::load_algebra(&v, g.samples, g.seed, g.tol)?;
    let a = loaded.as_algebra();
    let sp = a.spec().clone();
    let (d, lambda, k) = (sp.fp_dim(), sp.min_projection_trace(), a.structure().k());
    let elem = |x: &Elem| to_value(&ElementJson::from_element(x));
    let mut body = match op {
        "smooth" => {
            let (pp, q) = (p.num(&["p"], Some(1.0))?, p.num(&["q"], Some(1.0))?);
            let (eps, eta) = (p.num(&["eps", "ε"], Some(0.0))?, p.num(&["eta", "η"], Some(0.0))?);
            let x = element_or_random(&mut p, "x", &loaded, g.seed, 0)?;
            let y = element_or_random(&mut p, "y", &loaded, g.seed, 1)?;
            p.finish()?;
            let rep = inequality::smooth_qeci_check(a, &x, &y, pp, q, eps, eta, g.budget, g.seed, g.tol)?;
            let violated = rep.verdict == Verdict::Violation;
            return Ok((json!({"kind": kind.name(), "report": rep, "passed": !violated}), violated));
        }
        "smooth-entropy" => {
            let (pp, eps) = (p.num(&["p"], Some(1.0))?, p.num(&["eps", "ε"], None)?);
            let x = element_or_random(&mut p, "x", &loaded, g.seed, 0)?;
            p.finish()?;
            let r = inequality::smooth_entropy(&x, pp, eps, g.budget, g.seed)?;
            json!({"value": r.value, "entropy_of_x": r.base, "starts": r.starts, "x": elem(&x), "witness": elem(&r.witness),
                   "semantics": "best-found value of a supremum (lower bound)"})
        }
        "smooth-conv" => {
            let (pp, q) = (p.num(&["p"], Some(1.0))?, p.num(&["q"], Some(1.0))?);
            let (eps, eta) = (p.num(&["eps", "ε"], None)?, p.num(&["eta", "η"], None)?);
            let x = element_or_random(&mut p, "x", &loaded, g.seed, 0)?;
            let y = element_or_random(&mut p, "y", &loaded, g.seed, 1)?;
            p.finish()?;
            let r = inequality::smooth_conv_entropy(a, &x, &y, pp, q, eps, eta, g.budget, g.seed)?;
            json!({"value": r.value, "entropy_of_convolution": r.base, "starts": r.starts, "z": elem(&r.z), "w": elem(&r.w),
                   "semantics": "best-found value of an infimum (upper bound)"})
        }
        "continuity" => {
            let (pp, eps, h) = (p.num(&["p"], Some(1.0))?, p.num(&["eps", "ε"], None)?, p.num(&["h"], Some(1.0))?);
            p.finish()?;
            json!({"bound": continuity_bound(d, lambda, h, pp, eps)?, "d": d, "lambda": lambda, "h": h})
        }
        _ => {
            let (pp, q) = (p.num(&["p"], Some(1.0))?, p.num(&["q"], Some(1.0))?);
            let (eps, eta) = (p.num(&["eps", "ε"], None)?, p.num(&["eta", "η"], None)?);
            let h = p.num(&["h"], Some(1.0))?;
            p.finish()?;
            json!({"bound": conv_continuity_bound(d, lambda, h, k, pp, q, eps, eta)?, "d": d, "lambda": lambda, "k": k, "h": h})
        }
    };
    body["kind"] = json!(kind.name());
    Ok((body, false))
}
