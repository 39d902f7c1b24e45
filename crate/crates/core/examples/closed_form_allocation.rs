//! Splits a power budget between a source and two relays with the closed
//! form, and compares the predicted outage against equal-power splits.

use af_relay::allocation::{allocate_closed_form, allocate_epa, AllocationRequest, EpaVariant};
use af_relay::outage::allocation_outage;
use af_relay::{LinkPair, NormalizedLinks, PowerAllocation, Result};

pub fn run() -> Result<Vec<(&'static str, PowerAllocation, f64)>> {
    let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5), LinkPair::new(0.3, 0.8)])?;
    let req = AllocationRequest::new(links, 100.0, 1e-4, 1.0, None)?;
    let mut rows = Vec::new();
    for (name, alloc) in [
        ("closed_form", allocate_closed_form(&req)?),
        ("epa_all", allocate_epa(&req, EpaVariant::AllEqual)?),
        ("epa_half", allocate_epa(&req, EpaVariant::HalfSource)?),
    ] {
        let p = allocation_outage(&alloc, &req.links, req.n0, req.rate)?;
        rows.push((name, alloc, p));
    }
    Ok(rows)
}

fn main() -> Result<()> {
    for (name, alloc, p) in run()? {
        println!("{name:12} P_s = {:7.3}  P_r = {:?}  outage ~ {p:.3e}", alloc.p_s(), alloc.p_r());
    }
    Ok(())
}
