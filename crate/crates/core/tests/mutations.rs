//! Every seeded defect is caught by some small configuration. The two
//! lease defects need a shared copy to be read, which the standard
//! configuration never produces, so they are swept on `data/lease.cfg`.

use tardis::explorer::{mutation_sweep, standard_config};
use tardis::{Config, Mutation};

fn lease_config() -> Config {
    Config::parse(include_str!("../data/lease.cfg")).unwrap()
}

#[test]
fn every_mutation_is_caught_somewhere() {
    for mutation in Mutation::ALL {
        let (cfg, depth) = match mutation {
            Mutation::SkipLeaseRtsUpdate | Mutation::LoadHitPastLease => (lease_config(), 22),
            m => (standard_config(m.needs_memory()), 25),
        };
        let r = mutation_sweep(cfg, mutation, depth, 0);
        assert!(r.detected() && r.replayed, "{}", r.line());
    }
}

#[test]
fn unmutated_lease_config_is_clean() {
    let m = tardis::Machine::new(lease_config()).unwrap();
    let r = tardis::explorer::explore_bfs(
        &m,
        tardis::explorer::BfsOptions {
            depth: 22,
            jobs: 0,
            stop_on_violation: true,
        },
    );
    assert!(r.passed(), "{:?}", r.counterexample);
}
