//! Commands behind the `af-relay` binary. Each returns its CSV output as a
//! string so it can be driven from tests and examples without a process.

use std::fmt::Write as _;
use std::path::Path;
use std::{fs, io};

use crate::allocation::{lambda_prime, AllocationRequest};
use crate::error::Error;
use crate::geometry::{LinkPair, Point};
use crate::monte_carlo::{estimate_scheme_outage, power_gap_db, GapArm, GapOptions};
use crate::outage::allocation_outage;
use crate::partner::{greedy_select, optimal_partner_count, rank_map as rank_grid, Axis};
use crate::scenario::{ConfigError, Scenario};
use crate::scheme::{Scheme, SchemeAllocation};
use crate::table::{LambdaTable, Lookup, TableFormatError, TableSpec, OUT_OF_TABLE};

/// Placeholder for undefined values in CSV output.
pub const MISSING: &str = "MISSING";

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(Error),
    Io(io::Error),
    Table(TableFormatError),
}

impl CliError {
    /// 2: bad config or arguments, 3: numerical failure, 4: I/O or file format.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(Error::InvalidInput(_) | Error::Domain(_) | Error::EmptyCandidates) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Table(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Table(e) => write!(f, "table file: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<TableFormatError> for CliError {
    fn from(e: TableFormatError) -> Self {
        CliError::Table(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Shortest round-trip decimal; scientific for very small or large values.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn db(v: f64) -> f64 {
    10.0 * v.log10()
}

fn from_db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    Ok(Scenario::parse(&fs::read_to_string(path)?)?)
}

pub fn read_table(path: &Path) -> CliResult<LambdaTable> {
    Ok(LambdaTable::from_bytes(&fs::read(path)?)?)
}

pub fn write_table(path: &Path, table: &LambdaTable) -> CliResult<()> {
    Ok(fs::write(path, table.to_bytes())?)
}

/// The lookup table used by the `table` scheme: the scenario's file, or a
/// freshly built standard table when none is given.
pub fn scenario_table(sc: &Scenario) -> CliResult<Option<LambdaTable>> {
    if !sc.schemes.contains(&Scheme::Table) {
        return Ok(None);
    }
    match &sc.table {
        Some(path) => read_table(path).map(Some),
        None => Ok(Some(LambdaTable::build(&TableSpec::standard(sc.alpha))?)),
    }
}

fn request(sc: &Scenario, p_total: f64) -> CliResult<AllocationRequest> {
    Ok(AllocationRequest::new(sc.links()?, p_total, sc.n0, sc.rate, sc.p_max)?)
}

/// Analytic outage of a scheme's allocation over its transmitting partners.
fn scheme_outage_approx(sc: &Scenario, scheme: Scheme, req: &AllocationRequest, table: Option<&LambdaTable>) -> CliResult<(SchemeAllocation, f64)> {
    let sa = scheme.allocate(req, table)?;
    let (links, alloc) = sa.active()?;
    let p = allocation_outage(&alloc, &links, sc.n0, sc.rate)?;
    Ok((sa, p))
}

/// `scheme,p_s,p_r_1..p_r_m,outage_approx,infeasible`, one row per scheme.
pub fn allocate(sc: &Scenario, table: Option<&LambdaTable>) -> CliResult<String> {
    let p_total = sc
        .p_total
        .ok_or_else(|| ConfigError::for_key("p_total", "required by `allocate`"))?;
    let req = request(sc, p_total)?;
    let m = req.m();
    let mut out = String::from("scheme,p_s");
    for i in 1..=m {
        write!(out, ",p_r_{i}").unwrap();
    }
    out.push_str(",outage_approx,infeasible\n");
    for &scheme in &sc.schemes {
        let (sa, p) = scheme_outage_approx(sc, scheme, &req, table)?;
        write!(out, "{scheme},{}", fmt_num(sa.allocation.p_s())).unwrap();
        let p_r = sa.allocation.p_r();
        for i in 0..m {
            out.push(',');
            if let Some(&v) = p_r.get(i) {
                out.push_str(&fmt_num(v));
            }
        }
        writeln!(out, ",{},{}", fmt_num(p), u8::from(sa.allocation.infeasible())).unwrap();
    }
    Ok(out)
}

/// `scheme,p_total_db,outage_mc,ci_low,ci_high,outage_approx,n_trials,seed`.
/// With `n_trials = 0` the simulation columns stay empty.
pub fn sweep_power(sc: &Scenario, table: Option<&LambdaTable>) -> CliResult<String> {
    let powers_db = match (sc.sweep, sc.p_total) {
        (Some(s), _) => s.points(),
        (None, Some(p)) => vec![db(p)],
        (None, None) => return Err(ConfigError::for_key("sweep_db", "required by `sweep-power`").into()),
    };
    let mut out = String::from("scheme,p_total_db,outage_mc,ci_low,ci_high,outage_approx,n_trials,seed\n");
    for &scheme in &sc.schemes {
        for &p_db in &powers_db {
            let req = request(sc, from_db(p_db))?;
            let (sa, approx) = scheme_outage_approx(sc, scheme, &req, table)?;
            write!(out, "{scheme},{}", fmt_num(p_db)).unwrap();
            if sc.n_trials > 0 {
                let est = estimate_scheme_outage(&sa, sc.n0, sc.rate, sc.n_trials, sc.seed)?;
                write!(
                    out,
                    ",{},{},{}",
                    fmt_num(est.p_hat),
                    fmt_num(est.ci_low),
                    fmt_num(est.ci_high)
                )
                .unwrap();
            } else {
                out.push_str(",,,");
            }
            writeln!(out, ",{},{},{}", fmt_num(approx), sc.n_trials, sc.seed).unwrap();
        }
    }
    Ok(out)
}

/// Extra total power `a` needs over `b` to reach the scenario's `target_p`
/// (default 0.05), found by simulation.
pub fn gap(sc: &Scenario, a: Scheme, b: Scheme, opts: GapOptions, table: Option<&LambdaTable>) -> CliResult<String> {
    let target = sc.target_p.unwrap_or(0.05);
    let links = sc.links()?;
    let arm = |scheme| GapArm {
        scheme,
        links: &links,
        table,
    };
    let g = power_gap_db(arm(a), arm(b), sc.n0, sc.rate, target, sc.n_trials, sc.seed, opts)?;
    Ok(format!(
        "scheme_a,scheme_b,target_p,p_total_db_a,p_total_db_b,gap_db,n_trials,seed\n{a},{b},{},{},{},{},{},{}\n",
        fmt_num(target),
        fmt_num(g.p_total_db_a),
        fmt_num(g.p_total_db_b),
        fmt_num(g.gap_db),
        sc.n_trials,
        sc.seed
    ))
}

pub fn table_info(t: &LambdaTable) -> String {
    let (n_dsr, n_drd) = t.dims();
    let (d0, d1) = t.dsr_range();
    let (r0, r1) = t.drd_range();
    let out_of_table = t.cells().iter().filter(|&&c| c == OUT_OF_TABLE).count();
    format!(
        "alpha,dsr_min,dsr_max,drd_min,drd_max,n_dsr,n_drd,lambda_max,step,file_bytes,out_of_table_cells\n\
         {},{},{},{},{},{n_dsr},{n_drd},{},{},{},{out_of_table}\n",
        fmt_num(t.alpha()),
        fmt_num(d0),
        fmt_num(d1),
        fmt_num(r0),
        fmt_num(r1),
        fmt_num(t.lambda_max()),
        fmt_num(t.step()),
        t.to_bytes().len()
    )
}

fn lookup_field(l: Lookup) -> String {
    match l {
        Lookup::Value(v) => fmt_num(v),
        Lookup::OutOfTable => "OUT_OF_TABLE".into(),
    }
}

/// `d_sr,d_rd,lambda_table,lambda_exact`; unreachable cells read `OUT_OF_TABLE`.
pub fn table_query(t: &LambdaTable, pairs: &[LinkPair]) -> CliResult<String> {
    let mut out = String::from("d_sr,d_rd,lambda_table,lambda_exact\n");
    for p in pairs {
        let exact = lambda_prime(p.d_sr, p.d_rd, t.alpha(), 1.0)?;
        writeln!(
            out,
            "{},{},{},{}",
            fmt_num(p.d_sr),
            fmt_num(p.d_rd),
            lookup_field(t.query(p.d_sr, p.d_rd)),
            fmt_num(exact)
        )
        .unwrap();
    }
    Ok(out)
}

/// Table values over partner positions, with the source at `(0, 0)` and the
/// destination at `(1, 0)`: `x,y,d_sr,d_rd,lambda_table,lambda_exact`.
pub fn table_grid(t: &LambdaTable, xs: Axis, ys: Axis) -> CliResult<String> {
    let (s, d) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0));
    let mut out = String::from("x,y,d_sr,d_rd,lambda_table,lambda_exact\n");
    for y in ys.points() {
        for x in xs.points() {
            let p = Point::new(x, y);
            let (d_sr, d_rd) = (s.distance(&p), p.distance(&d));
            let (tab, exact) = if d_sr > 1e-12 && d_rd > 1e-12 {
                (
                    lookup_field(t.query(d_sr, d_rd)),
                    fmt_num(lambda_prime(d_sr, d_rd, t.alpha(), 1.0)?),
                )
            } else {
                (MISSING.into(), MISSING.into())
            };
            writeln!(out, "{},{},{},{},{tab},{exact}", fmt_num(x), fmt_num(y), fmt_num(d_sr), fmt_num(d_rd)).unwrap();
        }
    }
    Ok(out)
}

/// Candidate list: one `d_sr,d_rd` per line; `#` comments and an optional
/// `d_sr,d_rd` header line are skipped.
pub fn parse_candidates(text: &str) -> std::result::Result<Vec<LinkPair>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.replace(' ', "") == "d_sr,d_rd" {
            continue;
        }
        let bad = || ConfigError {
            line: Some(idx + 1),
            key: None,
            message: format!("expected `d_sr,d_rd`, got `{line}`"),
        };
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let d_sr: f64 = a.trim().parse().map_err(|_| bad())?;
        let d_rd: f64 = b.trim().parse().map_err(|_| bad())?;
        out.push(LinkPair::new(d_sr, d_rd));
    }
    Ok(out)
}

/// `index,d_sr,d_rd,r,chosen`, ascending by score.
pub fn rank(candidates: &[LinkPair], alpha: f64) -> CliResult<String> {
    let ranking = greedy_select(candidates, alpha)?;
    let mut out = String::from("index,d_sr,d_rd,r,chosen\n");
    for &(i, r) in &ranking.scores {
        let c = candidates[i];
        writeln!(
            out,
            "{i},{},{},{},{}",
            fmt_num(c.d_sr),
            fmt_num(c.d_rd),
            fmt_num(r),
            u8::from(i == ranking.chosen)
        )
        .unwrap();
    }
    Ok(out)
}

/// Score over partner positions with the source at `(0, 0)` and the
/// destination at `(1, 0)`: `x,y,r`, with `MISSING` at the endpoints.
pub fn rank_map(xs: Axis, ys: Axis, alpha: f64) -> CliResult<String> {
    let grid = rank_grid(xs, ys, Point::new(0.0, 0.0), Point::new(1.0, 0.0), alpha)?;
    let mut out = String::from("x,y,r\n");
    for (iy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            let r = grid.get(ix, iy).map_or_else(|| MISSING.to_string(), fmt_num);
            writeln!(out, "{},{},{r}", fmt_num(x), fmt_num(y)).unwrap();
        }
    }
    Ok(out)
}

/// `rate,snr_norm_db,m_star,outage_min,unimodal`, or with `curves` the full
/// `rate,snr_norm_db,m,outage_approx` table.
pub fn partner_count(
    rates: &[f64],
    snr_norm_db: &[f64],
    candidate: LinkPair,
    alpha: f64,
    m_max: usize,
    curves: bool,
) -> CliResult<String> {
    let mut out = String::from(if curves {
        "rate,snr_norm_db,m,outage_approx\n"
    } else {
        "rate,snr_norm_db,m_star,outage_min,unimodal\n"
    });
    for &rate in rates {
        for &s_db in snr_norm_db {
            let res = optimal_partner_count(rate, from_db(s_db), candidate, alpha, m_max)?;
            let (r, s) = (fmt_num(rate), fmt_num(s_db));
            if curves {
                for &(m, p) in &res.outage_by_m {
                    writeln!(out, "{r},{s},{m},{}", fmt_num(p)).unwrap();
                }
            } else {
                let p_min = res.outage_by_m[res.m_star].1;
                writeln!(out, "{r},{s},{},{},{}", res.m_star, fmt_num(p_min), u8::from(res.is_unimodal())).unwrap();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> Scenario {
        Scenario::parse("p_total = 100\npair = 0.5,0.5\nscheme = closed_form, none\nn_trials = 0\n").unwrap()
    }

    #[test]
    fn number_format_is_locale_free() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(100.0), "100");
        assert_eq!(fmt_num(1.5e-7), "1.5e-7");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn allocate_leaves_none_partner_columns_empty() {
        let csv = allocate(&fig3(), None).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "scheme,p_s,p_r_1,outage_approx,infeasible");
        assert!(lines[1].starts_with("closed_form,"));
        assert!(lines[2].starts_with("none,100,,"));
        for l in &lines[1..] {
            let cols: Vec<_> = l.split(',').collect();
            assert_eq!(cols.len(), 5);
        }
    }

    #[test]
    fn sweep_without_trials_has_empty_mc_columns() {
        let mut sc = fig3();
        sc.sweep = Some(crate::scenario::PowerSweep::new(10.0, 20.0, 5.0).unwrap());
        let csv = sweep_power(&sc, None).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("closed_form,10,,,,"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(ConfigError::new("x")).exit_code(), 2);
        assert_eq!(CliError::Numerical(Error::Bracket { lo: 0.0, hi: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Io(io::Error::other("x")).exit_code(), 4);
        let missing = Scenario::parse("pair = 0.5,0.5\n").unwrap();
        assert_eq!(allocate(&missing, None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn rank_marks_single_choice() {
        let c = parse_candidates("d_sr,d_rd\n0.9,0.9\n0.5,0.5 # mid\n").unwrap();
        let csv = rank(&c, 2.0).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert!(lines[1].starts_with("1,0.5,0.5,"));
        assert!(lines[1].ends_with(",1"));
        assert!(lines[2].ends_with(",0"));
        assert!(parse_candidates("0.5;0.5").is_err());
    }

    #[test]
    fn rank_map_marks_endpoints_missing() {
        let csv = rank_map(Axis::new(0.0, 1.0, 3).unwrap(), Axis::new(0.0, 0.0, 1).unwrap(), 2.0).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[1], "0,0,MISSING");
        assert_eq!(lines[3], "1,0,MISSING");
        assert!(!lines[2].contains(MISSING));
    }

    #[test]
    fn table_query_flags_out_of_range() {
        let t = LambdaTable::build(&TableSpec::compact(2.0)).unwrap();
        let csv = table_query(&t, &[LinkPair::new(0.5, 0.5), LinkPair::new(3.0, 0.5)]).unwrap();
        assert!(csv.lines().nth(2).unwrap().contains("OUT_OF_TABLE"));
        assert!(table_info(&t).lines().nth(1).unwrap().ends_with(",157,0"));
    }
}
