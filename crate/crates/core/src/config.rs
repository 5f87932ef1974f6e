//! Line-oriented configuration format.
//!
//! ```text
//! # comment
//! cores = 2
//! addrs = a b          # or a count: addrs = 2
//! mode = sc            # sc | tso
//! memory = off         # on | off
//! lease = 10
//! fifo = strict        # strict | per-address
//! capacity = 0         # 0 = unbounded
//! seed = 1
//! loadhit_guard = table6
//! values = fresh       # fresh | literal
//! prog 0: St a 1; Ld b
//! prog 1: St b 1; Ld a
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::fifo::FifoMode;
use crate::types::{Addr, Value, FRESH_STRIDE};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ConsistencyMode {
    #[default]
    Sc,
    Tso,
}

/// Which reading of the LoadHit guard to use. `Table6` treats every load
/// to an M line as a hit; `Table2` additionally requires `pts <= rts`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum LoadHitGuard {
    #[default]
    Table6,
    Table2,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ValueMode {
    /// Every store writes a globally unique token.
    #[default]
    Fresh,
    /// Stores write the value given in the program.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Load(Addr),
    Store(Addr, Value),
}

impl Op {
    pub fn addr(&self) -> Addr {
        match *self {
            Op::Load(a) | Op::Store(a, _) => a,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub ops: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub cores: usize,
    pub addr_names: Vec<String>,
    pub mode: ConsistencyMode,
    pub memory: bool,
    pub lease: u64,
    pub fifo: FifoMode,
    pub capacity: usize,
    pub seed: u64,
    pub loadhit_guard: LoadHitGuard,
    pub values: ValueMode,
    pub programs: Vec<Program>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cores: 0,
            addr_names: Vec::new(),
            mode: ConsistencyMode::Sc,
            memory: false,
            lease: 10,
            fifo: FifoMode::Strict,
            capacity: 0,
            seed: 0,
            loadhit_guard: LoadHitGuard::Table6,
            values: ValueMode::Fresh,
            programs: Vec::new(),
        }
    }
}

impl Config {
    pub fn addrs(&self) -> usize {
        self.addr_names.len()
    }

    pub fn total_ops(&self) -> usize {
        self.programs.iter().map(|p| p.ops.len()).sum()
    }

    pub fn addr_name(&self, a: Addr) -> &str {
        &self.addr_names[a.index()]
    }

    pub fn lookup_addr(&self, name: &str) -> Option<Addr> {
        self.addr_names
            .iter()
            .position(|n| n == name)
            .map(|i| Addr(i as u8))
    }

    /// Parses a configuration, rejecting any line it does not understand.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let (cfg, rest) = Self::parse_partial(text)?;
        if let Some((line, l)) = rest.first() {
            return Err(ConfigError::parse(
                *line,
                format!("unrecognized line `{l}`"),
            ));
        }
        Ok(cfg)
    }

    /// Parses the configuration keys and programs, handing back every other
    /// non-blank line (with its 1-based line number) to the caller.
    pub fn parse_partial(text: &str) -> Result<(Config, Vec<(usize, String)>), ConfigError> {
        let mut cfg = Config::default();
        let mut cores: Option<usize> = None;
        let mut addrs: Option<Vec<String>> = None;
        let mut raw_progs: Vec<(usize, usize, String)> = Vec::new();
        let mut rest = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(body) = line.strip_prefix("prog") {
                let (core, ops) = body
                    .split_once(':')
                    .ok_or_else(|| ConfigError::parse(line_no, "expected `prog <core>: <ops>`"))?;
                let core: usize = core.trim().parse().map_err(|_| {
                    ConfigError::parse(line_no, format!("bad core id `{}`", core.trim()))
                })?;
                raw_progs.push((line_no, core, ops.to_string()));
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                rest.push((line_no, line.to_string()));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| ConfigError::parse(line_no, format!("bad {what} `{value}`"));
            match key {
                "cores" => cores = Some(value.parse().map_err(|_| bad("core count"))?),
                "addrs" => {
                    addrs = Some(match value.parse::<usize>() {
                        Ok(n) => (0..n).map(|i| i.to_string()).collect(),
                        Err(_) => value
                            .split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|s| !s.is_empty())
                            .map(str::to_string)
                            .collect(),
                    })
                }
                "mode" => cfg.mode = value.parse().map_err(|_| bad("mode"))?,
                "memory" => cfg.memory = parse_switch(value).ok_or_else(|| bad("memory switch"))?,
                "lease" => cfg.lease = parse_lease(value)?,
                "fifo" => cfg.fifo = parse_fifo(value).ok_or_else(|| bad("fifo mode"))?,
                "capacity" => cfg.capacity = value.parse().map_err(|_| bad("capacity"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "loadhit_guard" => cfg.loadhit_guard = value.parse().map_err(|_| bad("guard"))?,
                "values" => {
                    cfg.values = match value {
                        "fresh" => ValueMode::Fresh,
                        "literal" => ValueMode::Literal,
                        _ => return Err(bad("value mode")),
                    }
                }
                _ => rest.push((line_no, line.to_string())),
            }
        }

        // Addresses default to first appearance order in the programs.
        let addr_names = match addrs {
            Some(names) => names,
            None => {
                let mut names: Vec<String> = Vec::new();
                for (_, _, ops) in &raw_progs {
                    for op in ops.split(';') {
                        if let Some(a) = op.split_whitespace().nth(1) {
                            if !names.iter().any(|n| n == a) {
                                names.push(a.to_string());
                            }
                        }
                    }
                }
                names
            }
        };
        if addr_names.is_empty() {
            return Err(ConfigError::NoAddresses);
        }
        if addr_names.len() > u8::MAX as usize {
            return Err(ConfigError::Invalid("too many addresses".into()));
        }
        cfg.addr_names = addr_names;

        let cores = match cores {
            Some(n) => n,
            None => raw_progs.iter().map(|(_, c, _)| c + 1).max().unwrap_or(0),
        };
        if cores == 0 {
            return Err(ConfigError::NoCores);
        }
        if cores > u8::MAX as usize {
            return Err(ConfigError::Invalid("too many cores".into()));
        }
        cfg.cores = cores;
        cfg.programs = vec![Program::default(); cores];

        for (line_no, core, ops) in raw_progs {
            if core >= cores {
                return Err(ConfigError::parse(
                    line_no,
                    format!("core {core} out of range"),
                ));
            }
            let mut prog = Vec::new();
            for op in ops.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                prog.push(cfg.parse_op(line_no, op)?);
            }
            cfg.programs[core].ops = prog;
        }
        cfg.validate()?;
        Ok((cfg, rest))
    }

    fn parse_op(&self, line_no: usize, op: &str) -> Result<Op, ConfigError> {
        let parts: Vec<&str> = op.split_whitespace().collect();
        let addr = |name: &str| {
            self.lookup_addr(name)
                .ok_or_else(|| ConfigError::parse(line_no, format!("unknown address `{name}`")))
        };
        match parts.as_slice() {
            ["Ld", a] => Ok(Op::Load(addr(a)?)),
            ["St", a, v] => {
                let v: u64 = v
                    .parse()
                    .map_err(|_| ConfigError::parse(line_no, format!("bad value `{v}`")))?;
                Ok(Op::Store(addr(a)?, Value(v)))
            }
            _ => Err(ConfigError::parse(line_no, format!("bad op `{op}`"))),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cores == 0 {
            return Err(ConfigError::NoCores);
        }
        if self.addr_names.is_empty() {
            return Err(ConfigError::NoAddresses);
        }
        if self.programs.len() != self.cores {
            return Err(ConfigError::Invalid(format!(
                "{} programs for {} cores",
                self.programs.len(),
                self.cores
            )));
        }
        if self.values == ValueMode::Fresh
            && self
                .programs
                .iter()
                .any(|p| p.ops.len() as u64 >= FRESH_STRIDE)
        {
            return Err(ConfigError::Invalid(
                "program too long for fresh tokens".into(),
            ));
        }
        Ok(())
    }

    /// Renders the configuration back into the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("cores = {}\n", self.cores));
        out.push_str(&format!("addrs = {}\n", self.addr_names.join(" ")));
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str(&format!(
            "memory = {}\n",
            if self.memory { "on" } else { "off" }
        ));
        out.push_str(&format!("lease = {}\n", self.lease));
        out.push_str(&format!("fifo = {}\n", fifo_name(self.fifo)));
        out.push_str(&format!("capacity = {}\n", self.capacity));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("loadhit_guard = {}\n", self.loadhit_guard));
        out.push_str(&format!(
            "values = {}\n",
            match self.values {
                ValueMode::Fresh => "fresh",
                ValueMode::Literal => "literal",
            }
        ));
        for (c, p) in self.programs.iter().enumerate() {
            let ops: Vec<String> = p
                .ops
                .iter()
                .map(|op| match op {
                    Op::Load(a) => format!("Ld {}", self.addr_name(*a)),
                    Op::Store(a, v) => format!("St {} {}", self.addr_name(*a), v),
                })
                .collect();
            out.push_str(&format!("prog {c}: {}\n", ops.join("; ")));
        }
        out
    }
}

fn parse_switch(v: &str) -> Option<bool> {
    match v {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_lease(v: &str) -> Result<u64, ConfigError> {
    v.parse::<u64>()
        .map_err(|_| ConfigError::NegativeLease(v.to_string()))
}

pub fn parse_fifo(v: &str) -> Option<FifoMode> {
    match v {
        "strict" => Some(FifoMode::Strict),
        "per-address" | "per_address" => Some(FifoMode::PerAddress),
        _ => None,
    }
}

pub fn fifo_name(m: FifoMode) -> &'static str {
    match m {
        FifoMode::Strict => "strict",
        FifoMode::PerAddress => "per-address",
    }
}

impl FromStr for ConsistencyMode {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(ConsistencyMode::Sc),
            "tso" => Ok(ConsistencyMode::Tso),
            _ => Err(()),
        }
    }
}

impl fmt::Display for ConsistencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsistencyMode::Sc => "sc",
            ConsistencyMode::Tso => "tso",
        })
    }
}

impl FromStr for LoadHitGuard {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "table6" => Ok(LoadHitGuard::Table6),
            "table2" => Ok(LoadHitGuard::Table2),
            _ => Err(()),
        }
    }
}

impl fmt::Display for LoadHitGuard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoadHitGuard::Table6 => "table6",
            LoadHitGuard::Table2 => "table2",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SB: &str =
        "cores = 2\naddrs = a b\nvalues = literal\nprog 0: St a 1; Ld b\nprog 1: St b 1; Ld a\n";

    #[test]
    fn parses_litmus_style_config() {
        let cfg = Config::parse(SB).unwrap();
        assert_eq!(cfg.cores, 2);
        assert_eq!(cfg.addrs(), 2);
        assert_eq!(
            cfg.programs[0].ops,
            vec![Op::Store(Addr(0), Value(1)), Op::Load(Addr(1))]
        );
        assert_eq!(cfg.values, ValueMode::Literal);
        assert_eq!(cfg.lease, 10);
    }

    #[test]
    fn round_trips_through_text() {
        let cfg = Config::parse(SB).unwrap();
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn infers_addresses_and_cores() {
        let cfg = Config::parse("prog 1: St x 3; Ld y").unwrap();
        assert_eq!(cfg.cores, 2);
        assert_eq!(cfg.addr_names, vec!["x", "y"]);
        assert!(cfg.programs[0].ops.is_empty());
    }

    #[test]
    fn rejects_degenerate_configs() {
        assert_eq!(
            Config::parse("cores = 2\naddrs = 0"),
            Err(ConfigError::NoAddresses)
        );
        assert_eq!(
            Config::parse("cores = 0\naddrs = 1"),
            Err(ConfigError::NoCores)
        );
        assert!(matches!(
            Config::parse("cores = 1\naddrs = 1\nlease = -3"),
            Err(ConfigError::NegativeLease(_))
        ));
        assert!(matches!(
            Config::parse("cores = 1\naddrs = a\nprog 0: Ld b"),
            Err(ConfigError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            Config::parse("cores = 1\naddrs = a\nbogus line"),
            Err(ConfigError::Parse { .. })
        ));
    }
}
