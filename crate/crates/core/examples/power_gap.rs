//! Extra power the direct link needs to match a cooperative link at 5%
//! outage, found by bisection on simulated outage.

use af_relay::monte_carlo::{power_gap_db, GapArm, GapOptions, GapResult};
use af_relay::{LinkPair, NormalizedLinks, Result, Scheme};

pub fn run(n_trials: u64) -> Result<GapResult> {
    let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)])?;
    let arm = |scheme| GapArm {
        scheme,
        links: &links,
        table: None,
    };
    power_gap_db(
        arm(Scheme::None),
        arm(Scheme::ClosedForm),
        1e-4,
        1.0,
        0.05,
        n_trials,
        11,
        GapOptions::default(),
    )
}

fn main() -> Result<()> {
    let g = run(200_000)?;
    println!("direct:      {:.2} dB", g.p_total_db_a);
    println!("cooperative: {:.2} dB", g.p_total_db_b);
    println!("gap:         {:.2} dB", g.gap_db);
    Ok(())
}
