//! Litmus tests: small programs run under many schedules, with observed
//! outcomes compared against forbidden predicates and the reference model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::config::{Config, ConsistencyMode, ValueMode};
use crate::consistency::models::{
    registers, sc_outcomes, tso_outcomes, ModelOutcomes, Outcome, Reg,
};
use crate::error::{ConfigError, Error};
use crate::explorer::{render_trace, run_random, ScheduleConfig};
use crate::protocol::Machine;
use crate::types::{CoreId, Value};
use crate::verdict::{Invariant, Violation};

/// Conjunction of register equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub conds: Vec<(Reg, Value)>,
}

impl Predicate {
    pub fn matches(&self, regs: &[Reg], o: &Outcome) -> bool {
        self.conds.iter().all(|(r, v)| {
            regs.iter()
                .position(|x| x == r)
                .is_some_and(|i| o.0.get(i) == Some(v))
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.conds.iter().map(|(r, v)| format!("{r}={v}")).collect();
        f.write_str(&parts.join(" & "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LitmusSpec {
    pub name: String,
    pub config: Config,
    pub forbid: Vec<Predicate>,
    pub allow: Vec<Predicate>,
}

impl LitmusSpec {
    /// Config lines plus `name = ...`, `forbid: ...` and `allow: ...`.
    /// Store values are taken literally unless `values` is set.
    pub fn parse(text: &str) -> Result<LitmusSpec, ConfigError> {
        let (mut config, rest) = Config::parse_partial(text)?;
        let explicit_values = text.lines().any(|l| {
            l.split('#')
                .next()
                .unwrap_or("")
                .trim_start()
                .starts_with("values")
        });
        if !explicit_values {
            config.values = ValueMode::Literal;
        }
        let regs = registers(&config);
        let mut spec = LitmusSpec {
            name: String::new(),
            config,
            forbid: Vec::new(),
            allow: Vec::new(),
        };
        for (line_no, line) in rest {
            if let Some(body) = line.strip_prefix("forbid:") {
                spec.forbid.push(parse_predicate(line_no, body, &regs)?);
            } else if let Some(body) = line.strip_prefix("allow:") {
                spec.allow.push(parse_predicate(line_no, body, &regs)?);
            } else if let Some((_, v)) = line.split_once('=').filter(|(k, _)| k.trim() == "name") {
                spec.name = v.trim().to_string();
            } else {
                return Err(ConfigError::parse(
                    line_no,
                    format!("unrecognized line `{line}`"),
                ));
            }
        }
        Ok(spec)
    }
}

fn parse_predicate(line_no: usize, body: &str, regs: &[Reg]) -> Result<Predicate, ConfigError> {
    let mut conds = Vec::new();
    for part in body.split('&').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || {
            ConfigError::parse(
                line_no,
                format!("bad condition `{part}`, expected r(<core>,<idx>)=<v>"),
            )
        };
        let (lhs, rhs) = part.split_once('=').ok_or_else(bad)?;
        let inner = lhs
            .trim()
            .strip_prefix("r(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (c, i) = inner.split_once(',').ok_or_else(bad)?;
        let reg = Reg {
            core: CoreId(c.trim().parse().map_err(|_| bad())?),
            idx: i.trim().parse().map_err(|_| bad())?,
        };
        if !regs.contains(&reg) {
            return Err(ConfigError::parse(line_no, format!("{reg} is not a load")));
        }
        let v: u64 = rhs.trim().parse().map_err(|_| bad())?;
        conds.push((reg, Value(v)));
    }
    if conds.is_empty() {
        return Err(ConfigError::parse(line_no, "empty predicate"));
    }
    Ok(Predicate { conds })
}

/// Reference-model outcomes for `cfg`'s programs under `mode`.
pub fn model_outcomes(cfg: &Config, mode: ConsistencyMode) -> ModelOutcomes {
    match mode {
        ConsistencyMode::Sc => sc_outcomes(cfg),
        ConsistencyMode::Tso => tso_outcomes(cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LitmusReport {
    pub name: String,
    pub mode: ConsistencyMode,
    pub registers: Vec<Reg>,
    pub runs: u64,
    pub incomplete: u64,
    pub histogram: BTreeMap<Outcome, u64>,
    pub model: ModelOutcomes,
    /// Declared forbidden outcomes the reference model allows in this mode.
    pub relaxed: Vec<Outcome>,
    /// Violations with the seed and rendered trace of the run.
    pub violations: Vec<(Violation, u64, String)>,
}

impl LitmusReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.incomplete == 0
    }

    pub fn count(&self, o: &Outcome) -> u64 {
        self.histogram.get(o).copied().unwrap_or(0)
    }

    /// Histogram plus summary lines.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "litmus {} mode={} runs={} registers={}",
            if self.name.is_empty() {
                "-"
            } else {
                &self.name
            },
            self.mode,
            self.runs,
            self.registers
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )];
        let shown: BTreeSet<&Outcome> = self
            .histogram
            .keys()
            .chain(self.model.outcomes.iter())
            .collect();
        for o in shown {
            out.push(format!("outcome {o} count={}", self.count(o)));
        }
        for o in &self.relaxed {
            out.push(format!("relaxed {o} allowed under {}", self.mode));
        }
        let covered = self
            .model
            .outcomes
            .iter()
            .filter(|o| self.count(o) > 0)
            .count();
        out.push(format!(
            "stat litmus.coverage={covered}/{}",
            self.model.outcomes.len()
        ));
        out.push(format!("stat litmus.incomplete={}", self.incomplete));
        for (v, seed, _) in &self.violations {
            out.push(format!("{v} seed={seed}"));
        }
        out
    }
}

/// Runs the litmus programs under `runs` seeded schedules starting at
/// `seed`. Fails on any oracle violation, any outcome matching a forbidden
/// predicate the reference model also excludes, and any outcome outside
/// the reference model.
pub fn run_litmus(
    spec: &LitmusSpec,
    runs: u64,
    seed: u64,
    max_steps: usize,
    jobs: usize,
) -> Result<LitmusReport, Error> {
    let cfg = &spec.config;
    let m = Machine::new(cfg.clone())?;
    let regs = registers(cfg);
    let model = model_outcomes(cfg, cfg.mode);
    let relaxed: Vec<Outcome> = model
        .outcomes
        .iter()
        .filter(|o| spec.forbid.iter().any(|p| p.matches(&regs, o)))
        .cloned()
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let results: Vec<_> = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|i| {
                let s = seed.wrapping_add(i);
                let r = run_random(&m, &ScheduleConfig::random(s, max_steps));
                let outcome = if r.completed {
                    crate::consistency::outcome_of(cfg, &r.state.trace)
                } else {
                    None
                };
                let mut v = r.violations.clone();
                if let Some(o) = &outcome {
                    if let Some(p) = spec.forbid.iter().find(|p| p.matches(&regs, o)) {
                        if !model.outcomes.contains(o) {
                            v.push(Violation::new(
                                Invariant::ForbiddenOutcome,
                                format!("outcome {o} matches {p}"),
                            ));
                        }
                    }
                    if !model.outcomes.contains(o) {
                        v.push(Violation::new(
                            Invariant::ForbiddenOutcome,
                            format!("outcome {o} outside the {} reference model", cfg.mode),
                        ));
                    }
                }
                let trace = if v.is_empty() {
                    String::new()
                } else {
                    render_trace(&r)
                };
                (s, outcome, v, trace)
            })
            .collect()
    });

    let mut report = LitmusReport {
        name: spec.name.clone(),
        mode: cfg.mode,
        registers: regs,
        runs,
        incomplete: 0,
        histogram: BTreeMap::new(),
        model,
        relaxed,
        violations: Vec::new(),
    };
    for (s, outcome, v, trace) in results {
        match outcome {
            Some(o) => *report.histogram.entry(o).or_default() += 1,
            None => report.incomplete += 1,
        }
        report
            .violations
            .extend(v.into_iter().map(|x| (x, s, trace.clone())));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SB: &str = "name = SB\naddrs = a b\nprog 0: St a 1; Ld b\nprog 1: St b 1; Ld a\nforbid: r(0,1)=0 & r(1,1)=0\n";

    #[test]
    fn parses_predicates() {
        let s = LitmusSpec::parse(SB).unwrap();
        assert_eq!(s.name, "SB");
        assert_eq!(s.config.values, ValueMode::Literal);
        assert_eq!(s.forbid[0].to_string(), "r(0,1)=0 & r(1,1)=0");
        assert!(LitmusSpec::parse("addrs = a\nprog 0: Ld a\nforbid: r(0,5)=1").is_err());
        assert!(LitmusSpec::parse("addrs = a\nprog 0: Ld a\nforbid: x=1").is_err());
        assert!(LitmusSpec::parse("addrs = a\nprog 0: Ld a\nbogus line").is_err());
    }

    #[test]
    fn sb_sc_small_batch() {
        let s = LitmusSpec::parse(SB).unwrap();
        let r = run_litmus(&s, 200, 0, 1000, 1).unwrap();
        assert!(r.passed(), "{:?}", r.lines());
        assert_eq!(r.count(&Outcome(vec![Value(0), Value(0)])), 0);
        assert!(r.relaxed.is_empty());
    }

    #[test]
    fn sb_tso_relaxes_the_forbidden_outcome() {
        let mut s = LitmusSpec::parse(SB).unwrap();
        s.config.mode = ConsistencyMode::Tso;
        let r = run_litmus(&s, 100, 0, 1000, 1).unwrap();
        assert_eq!(r.relaxed, vec![Outcome(vec![Value(0), Value(0)])]);
        assert!(r.passed(), "{:?}", r.lines());
    }
}
