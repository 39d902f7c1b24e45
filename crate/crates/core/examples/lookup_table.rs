//! Builds a byte-quantized lambda' table, round-trips it through its file
//! encoding and allocates from it.

use af_relay::allocation::allocate_closed_form;
use af_relay::outage::allocation_outage;
use af_relay::{allocate_from_table, AllocationRequest, LambdaTable, LinkPair, NormalizedLinks, Result, TableSpec};

pub struct TableDemo {
    pub file_bytes: usize,
    pub exact_outage: f64,
    pub table_outage: f64,
}

pub fn run() -> Result<TableDemo> {
    let table = LambdaTable::build(&TableSpec::standard(2.0))?;
    let bytes = table.to_bytes();
    let table = LambdaTable::from_bytes(&bytes).expect("fresh encoding decodes");

    let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5), LinkPair::new(0.7, 0.4)])?;
    let req = AllocationRequest::new(links, 300.0, 1e-4, 1.0, None)?;
    let outage = |a| allocation_outage(a, &req.links, req.n0, req.rate);
    Ok(TableDemo {
        file_bytes: bytes.len(),
        exact_outage: outage(&allocate_closed_form(&req)?)?,
        table_outage: outage(&allocate_from_table(&req, &table)?)?,
    })
}

fn main() -> Result<()> {
    let d = run()?;
    println!("table file: {} bytes", d.file_bytes);
    println!("exact lambda'  outage ~ {:.4e}", d.exact_outage);
    println!("table lambda'  outage ~ {:.4e}", d.table_outage);
    // outage falls as P_T^-(m+1), so an outage ratio maps to a power offset
    let penalty_db = 10.0 * (d.table_outage / d.exact_outage).log10() / 3.0;
    println!("power penalty: {penalty_db:.3} dB");
    Ok(())
}
