//! Shared helpers for the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tardis::{Addr, Config, ConsistencyMode, Op, Program, Value};

/// 2 or 3 cores, 2 addresses, 4 to 6 operations per core, fresh values.
pub fn random_config(seed: u64, mode: ConsistencyMode) -> Config {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cores = rng.gen_range(2..=3);
    let programs = (0..cores)
        .map(|_| Program {
            ops: (0..rng.gen_range(4..=6))
                .map(|_| {
                    let a = Addr(rng.gen_range(0..2));
                    if rng.gen_bool(0.5) {
                        Op::Store(a, Value(1))
                    } else {
                        Op::Load(a)
                    }
                })
                .collect(),
        })
        .collect();
    Config {
        cores,
        addr_names: vec!["0".into(), "1".into()],
        mode,
        lease: rng.gen_range(1..=4),
        programs,
        ..Config::default()
    }
}

pub fn report(criterion: u32, what: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion} {} {what}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}
