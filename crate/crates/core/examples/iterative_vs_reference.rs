//! The coupled fixed-point allocator against a direct KKT solve and the
//! one-shot closed form, for three partners.

use af_relay::allocation::{allocate_closed_form, allocate_iterative, allocate_reference_optimum};
use af_relay::outage::allocation_outage;
use af_relay::{AllocationRequest, IterativeOptions, LinkPair, NormalizedLinks, Result};

pub struct Comparison {
    pub iterations: usize,
    pub closed_form: f64,
    pub iterative: f64,
    pub reference: f64,
}

pub fn run() -> Result<Comparison> {
    let pairs = vec![LinkPair::new(0.4, 0.7), LinkPair::new(0.6, 0.5), LinkPair::new(0.9, 0.3)];
    let links = NormalizedLinks::from_pairs(1.0, 3.0, pairs)?;
    let req = AllocationRequest::new(links, 1e3, 1.0, 1.0, None)?;
    let outage = |a| allocation_outage(a, &req.links, req.n0, req.rate);

    let it = allocate_iterative(&req, IterativeOptions::default())?;
    Ok(Comparison {
        iterations: it.iterations,
        closed_form: outage(&allocate_closed_form(&req)?)?,
        iterative: outage(&it.allocation)?,
        reference: outage(&allocate_reference_optimum(&req)?)?,
    })
}

fn main() -> Result<()> {
    let c = run()?;
    println!("converged in {} sweeps", c.iterations);
    println!("closed form  {:.6e}", c.closed_form);
    println!("iterative    {:.6e}", c.iterative);
    println!("KKT solve    {:.6e}", c.reference);
    Ok(())
}
