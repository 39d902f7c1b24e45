//! How many identical partners pay off, as the rate and SNR change.

use af_relay::{optimal_partner_count, LinkPair, Result};

pub fn run() -> Result<Vec<(f64, f64, usize)>> {
    let mut rows = Vec::new();
    for rate in [0.5, 1.0, 2.0, 4.0] {
        for snr_db in [10.0, 20.0, 30.0, 40.0] {
            let snr: f64 = 10f64.powf(snr_db / 10.0);
            let res = optimal_partner_count(rate, snr, LinkPair::new(0.5, 0.5), 2.0, 10)?;
            rows.push((rate, snr_db, res.m_star));
        }
    }
    Ok(rows)
}

fn main() -> Result<()> {
    println!("rate  snr[dB]  m*");
    for (rate, snr_db, m) in run()? {
        println!("{rate:4}  {snr_db:7}  {m}");
    }
    Ok(())
}
