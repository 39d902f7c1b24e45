//! Byte-quantized lookup table of `lambda'(D_sr, D_rd)` at `zeta = 1`.
//!
//! Byte `k` in `0..=254` decodes to `k * lambda_max / 254`; byte 255 marks a
//! cell where the partner gets no power. Lookups are nearest-cell.
//!
//! On-disk layout, little-endian:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4 | magic `LPT1` |
//! | 4  | 1 | version (1) |
//! | 5  | 8 | alpha (f64) |
//! | 13 | 8 | dsr_min |
//! | 21 | 8 | dsr_max |
//! | 29 | 8 | drd_min |
//! | 37 | 8 | drd_max |
//! | 45 | 8 | lambda_max |
//! | 53 | 2 | n_dsr (u16) |
//! | 55 | 2 | n_drd (u16) |
//! | 57 | n_dsr * n_drd | cells, row-major in D_sr |

use thiserror::Error;

use crate::allocation::{allocate_with_lambda_prime, lambda_prime, AllocationRequest, PowerAllocation};
use crate::error::{invalid, Result};

pub const MAGIC: [u8; 4] = *b"LPT1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 57;
/// Cell marker for "give this partner zero power".
pub const OUT_OF_TABLE: u8 = 255;
/// Largest code that decodes to a value.
pub const MAX_CODE: u8 = 254;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableFormatError {
    #[error("bad magic {0:?}, expected \"LPT1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported table version {0}")]
    BadVersion(u8),
    #[error("truncated table: need {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{0} unexpected trailing bytes after payload")]
    TrailingData(usize),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
}

/// Result of a table lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lookup {
    Value(f64),
    OutOfTable,
}

impl Lookup {
    pub fn value(self) -> Option<f64> {
        match self {
            Lookup::Value(v) => Some(v),
            Lookup::OutOfTable => None,
        }
    }
}

/// Build parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub alpha: f64,
    pub dsr_range: (f64, f64),
    pub drd_range: (f64, f64),
    pub n_dsr: u16,
    pub n_drd: u16,
    pub lambda_max: f64,
    /// Cells whose `lambda'` falls below this are stored as [`OUT_OF_TABLE`].
    pub cutoff: f64,
}

impl TableSpec {
    /// 100 x 100 cells over `[0.05, 1.5]^2`, `lambda_max = 8`.
    pub fn standard(alpha: f64) -> Self {
        Self {
            alpha,
            dsr_range: (0.05, 1.5),
            drd_range: (0.05, 1.5),
            n_dsr: 100,
            n_drd: 100,
            lambda_max: 8.0,
            cutoff: 0.0,
        }
    }

    /// 10 x 10 cells: a 100-byte payload.
    pub fn compact(alpha: f64) -> Self {
        Self {
            n_dsr: 10,
            n_drd: 10,
            ..Self::standard(alpha)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    alpha: f64,
    dsr_range: (f64, f64),
    drd_range: (f64, f64),
    n_dsr: u16,
    n_drd: u16,
    lambda_max: f64,
    cells: Vec<u8>,
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> std::result::Result<(), String> {
    if lo > 0.0 && hi > lo && hi.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} range ({lo}, {hi}) must satisfy 0 < min < max"))
    }
}

fn check_header(
    alpha: f64,
    dsr: (f64, f64),
    drd: (f64, f64),
    n_dsr: u16,
    n_drd: u16,
    lambda_max: f64,
) -> std::result::Result<(), String> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(format!("alpha must be positive, got {alpha}"));
    }
    check_range("D_sr", dsr)?;
    check_range("D_rd", drd)?;
    if n_dsr == 0 || n_drd == 0 {
        return Err("grid sizes must be at least 1".into());
    }
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(format!("lambda_max must be positive, got {lambda_max}"));
    }
    Ok(())
}

fn cell_center((lo, hi): (f64, f64), n: u16, i: usize) -> f64 {
    lo + (i as f64 + 0.5) * (hi - lo) / n as f64
}

fn cell_index((lo, hi): (f64, f64), n: u16, x: f64) -> Option<usize> {
    if !(x >= lo && x <= hi) {
        return None;
    }
    let i = ((x - lo) / (hi - lo) * n as f64).floor() as usize;
    Some(i.min(n as usize - 1))
}

impl LambdaTable {
    pub fn build(spec: &TableSpec) -> Result<Self> {
        check_header(spec.alpha, spec.dsr_range, spec.drd_range, spec.n_dsr, spec.n_drd, spec.lambda_max)
            .map_err(invalid)?;
        let step = spec.lambda_max / MAX_CODE as f64;
        let mut cells = Vec::with_capacity(spec.n_dsr as usize * spec.n_drd as usize);
        for i in 0..spec.n_dsr as usize {
            let d_sr = cell_center(spec.dsr_range, spec.n_dsr, i);
            let bound = d_sr.powf(spec.alpha).recip();
            for j in 0..spec.n_drd as usize {
                let d_rd = cell_center(spec.drd_range, spec.n_drd, j);
                let exact = lambda_prime(d_sr, d_rd, spec.alpha, 1.0)?;
                if exact < spec.cutoff {
                    cells.push(OUT_OF_TABLE);
                    continue;
                }
                let mut code = (exact / step).round().min(MAX_CODE as f64) as u8;
                // rounding up must not reach the infinite-power boundary
                while code > 0 && code as f64 * step >= bound {
                    code -= 1;
                }
                cells.push(code);
            }
        }
        Ok(Self {
            alpha: spec.alpha,
            dsr_range: spec.dsr_range,
            drd_range: spec.drd_range,
            n_dsr: spec.n_dsr,
            n_drd: spec.n_drd,
            lambda_max: spec.lambda_max,
            cells,
        })
    }

    /// Table with caller-supplied cells, mainly for tests and tools.
    pub fn from_cells(spec: &TableSpec, cells: Vec<u8>) -> Result<Self> {
        check_header(spec.alpha, spec.dsr_range, spec.drd_range, spec.n_dsr, spec.n_drd, spec.lambda_max)
            .map_err(invalid)?;
        if cells.len() != spec.n_dsr as usize * spec.n_drd as usize {
            return Err(invalid("cell count does not match grid size"));
        }
        Ok(Self {
            alpha: spec.alpha,
            dsr_range: spec.dsr_range,
            drd_range: spec.drd_range,
            n_dsr: spec.n_dsr,
            n_drd: spec.n_drd,
            lambda_max: spec.lambda_max,
            cells,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dsr_range(&self) -> (f64, f64) {
        self.dsr_range
    }

    pub fn drd_range(&self) -> (f64, f64) {
        self.drd_range
    }

    pub fn dims(&self) -> (u16, u16) {
        (self.n_dsr, self.n_drd)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// One quantization step, `lambda_max / 254`.
    pub fn step(&self) -> f64 {
        self.lambda_max / MAX_CODE as f64
    }

    pub fn decode(&self, code: u8) -> Lookup {
        if code == OUT_OF_TABLE {
            Lookup::OutOfTable
        } else {
            Lookup::Value(code as f64 * self.step())
        }
    }

    /// `(D_sr, D_rd)` at the center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            cell_center(self.dsr_range, self.n_dsr, i),
            cell_center(self.drd_range, self.n_drd, j),
        )
    }

    pub fn cell(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.n_drd as usize + j]
    }

    pub fn query(&self, d_sr: f64, d_rd: f64) -> Lookup {
        match (
            cell_index(self.dsr_range, self.n_dsr, d_sr),
            cell_index(self.drd_range, self.n_drd, d_rd),
        ) {
            (Some(i), Some(j)) => self.decode(self.cell(i, j)),
            _ => Lookup::OutOfTable,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.cells.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        for v in [
            self.alpha,
            self.dsr_range.0,
            self.dsr_range.1,
            self.drd_range.0,
            self.drd_range.1,
            self.lambda_max,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.n_dsr.to_le_bytes());
        out.extend_from_slice(&self.n_drd.to_le_bytes());
        out.extend_from_slice(&self.cells);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, TableFormatError> {
        if bytes.len() < 4 {
            return Err(TableFormatError::Truncated {
                expected: HEADER_LEN,
                got: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(TableFormatError::BadMagic(magic));
        }
        if bytes.len() < HEADER_LEN {
            return Err(TableFormatError::Truncated {
                expected: HEADER_LEN,
                got: bytes.len(),
            });
        }
        if bytes[4] != VERSION {
            return Err(TableFormatError::BadVersion(bytes[4]));
        }
        let f = |k: usize| f64::from_le_bytes(bytes[5 + 8 * k..13 + 8 * k].try_into().unwrap());
        let (alpha, dsr, drd, lambda_max) = (f(0), (f(1), f(2)), (f(3), f(4)), f(5));
        let n_dsr = u16::from_le_bytes([bytes[53], bytes[54]]);
        let n_drd = u16::from_le_bytes([bytes[55], bytes[56]]);
        check_header(alpha, dsr, drd, n_dsr, n_drd, lambda_max).map_err(TableFormatError::InvalidHeader)?;
        let expected = HEADER_LEN + n_dsr as usize * n_drd as usize;
        if bytes.len() < expected {
            return Err(TableFormatError::Truncated {
                expected,
                got: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(TableFormatError::TrailingData(bytes.len() - expected));
        }
        Ok(Self {
            alpha,
            dsr_range: dsr,
            drd_range: drd,
            n_dsr,
            n_drd,
            lambda_max,
            cells: bytes[HEADER_LEN..].to_vec(),
        })
    }
}

/// Share of the partner's upper bound `1 / D_sr^alpha` that a looked-up
/// value may use. A nearest-cell value can exceed the bound at the exact
/// query point, which would mean unbounded relay power.
pub const TABLE_BOUND_GUARD: f64 = 0.99;

/// Closed-form budget split driven by table lookups instead of the per-partner
/// quadratic. Out-of-table partners get zero power.
pub fn allocate_from_table(req: &AllocationRequest, table: &LambdaTable) -> Result<PowerAllocation> {
    let alpha = req.links.alpha();
    if (alpha - table.alpha()).abs() > 1e-12 {
        return Err(invalid(format!(
            "table built for alpha = {} but scenario uses {alpha}",
            table.alpha()
        )));
    }
    let lps: Vec<Option<f64>> = req
        .links
        .pairs()
        .iter()
        .map(|p| {
            table.query(p.d_sr, p.d_rd).value().map(|lp| {
                let cap = TABLE_BOUND_GUARD * p.d_sr.powf(alpha).recip();
                lp.min(cap)
            })
        })
        .collect();
    allocate_with_lambda_prime(req, &lps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::allocate_closed_form;
    use crate::geometry::{LinkPair, NormalizedLinks};

    #[test]
    fn centered_cells_decode_within_one_step() {
        // 0.1-wide cells with centers at 0.1, 0.2, ..., 1.4
        let t = LambdaTable::build(&TableSpec {
            dsr_range: (0.05, 1.45),
            drd_range: (0.05, 1.45),
            n_dsr: 14,
            n_drd: 14,
            lambda_max: 4.0,
            ..TableSpec::standard(2.0)
        })
        .unwrap();
        let (c_sr, c_rd) = t.cell_center(4, 4);
        assert!((c_sr - 0.5).abs() < 1e-12 && (c_rd - 0.5).abs() < 1e-12);
        let step = t.step();
        let v = t.query(0.5, 0.5).value().unwrap();
        assert!((v - 4.0 / 3.0).abs() <= step / 2.0);
        let v = t.query(1.0, 0.5).value().unwrap();
        assert!((v - 0.542_572_89).abs() <= step / 2.0);
    }

    #[test]
    fn standard_table_cell_near_half() {
        let t = LambdaTable::build(&TableSpec::standard(2.0)).unwrap();
        let v = t.query(0.5, 0.5).value().unwrap();
        let (c_sr, c_rd) = t.cell_center(31, 31);
        let exact = lambda_prime(c_sr, c_rd, 2.0, 1.0).unwrap();
        assert!((v - exact).abs() <= t.step() / 2.0 + 1e-12);
    }

    #[test]
    fn one_cell_table_payload_is_one_byte() {
        let spec = TableSpec {
            dsr_range: (0.4, 0.6),
            drd_range: (0.4, 0.6),
            n_dsr: 1,
            n_drd: 1,
            ..TableSpec::standard(2.0)
        };
        let t = LambdaTable::build(&spec).unwrap();
        assert_eq!(t.cells().len(), 1);
        assert_eq!(t.to_bytes().len(), HEADER_LEN + 1);
    }

    #[test]
    fn canonical_file_size() {
        let t = LambdaTable::build(&TableSpec::standard(2.0)).unwrap();
        assert_eq!(t.to_bytes().len(), 57 + 10_000);
        let c = LambdaTable::build(&TableSpec::compact(2.0)).unwrap();
        assert_eq!(c.cells().len(), 100);
    }

    #[test]
    fn query_semantics() {
        let t = LambdaTable::build(&TableSpec::compact(2.0)).unwrap();
        let (c_sr, c_rd) = t.cell_center(3, 7);
        assert_eq!(t.query(c_sr, c_rd), t.decode(t.cell(3, 7)));
        let w = (1.5 - 0.05) / 10.0;
        assert_eq!(t.query(c_sr - 0.4 * w, c_rd + 0.4 * w), t.query(c_sr, c_rd));
        assert_eq!(t.query(10.0, 10.0), Lookup::OutOfTable);
        assert_eq!(t.query(0.01, 0.5), Lookup::OutOfTable);
        // upper edge belongs to the last cell
        assert_eq!(t.query(1.5, 1.5), t.decode(t.cell(9, 9)));
    }

    #[test]
    fn quantization_stays_below_boundary() {
        let t = LambdaTable::build(&TableSpec::standard(2.0)).unwrap();
        let (n_dsr, n_drd) = t.dims();
        for i in 0..n_dsr as usize {
            for j in 0..n_drd as usize {
                let (d_sr, _) = t.cell_center(i, j);
                if let Lookup::Value(v) = t.decode(t.cell(i, j)) {
                    assert!(v >= 0.0 && v < d_sr.powi(2).recip());
                }
            }
        }
    }

    #[test]
    fn cutoff_marks_worthless_cells() {
        let spec = TableSpec {
            cutoff: 0.5,
            ..TableSpec::compact(2.0)
        };
        let t = LambdaTable::build(&spec).unwrap();
        assert!(t.cells().contains(&OUT_OF_TABLE));
        for i in 0..10 {
            for j in 0..10 {
                let (a, b) = t.cell_center(i, j);
                let exact = lambda_prime(a, b, 2.0, 1.0).unwrap();
                assert_eq!(t.cell(i, j) == OUT_OF_TABLE, exact < 0.5);
            }
        }
    }

    #[test]
    fn parse_errors_are_distinct() {
        let t = LambdaTable::build(&TableSpec::compact(2.0)).unwrap();
        let bytes = t.to_bytes();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(LambdaTable::from_bytes(&bad), Err(TableFormatError::BadMagic(_))));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert_eq!(LambdaTable::from_bytes(&bad), Err(TableFormatError::BadVersion(2)));

        assert!(matches!(
            LambdaTable::from_bytes(&bytes[..bytes.len() - 1]),
            Err(TableFormatError::Truncated { .. })
        ));
        assert!(matches!(
            LambdaTable::from_bytes(&bytes[..20]),
            Err(TableFormatError::Truncated { .. })
        ));

        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(LambdaTable::from_bytes(&long), Err(TableFormatError::TrailingData(1)));

        let mut zero = bytes;
        zero[53] = 0;
        zero[54] = 0;
        assert!(matches!(
            LambdaTable::from_bytes(&zero),
            Err(TableFormatError::InvalidHeader(_))
        ));
    }

    #[test]
    fn table_allocation_examples() {
        let t = LambdaTable::build(&TableSpec::standard(2.0)).unwrap();
        let far = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(3.0, 3.0), LinkPair::new(0.5, 4.0)])
            .unwrap();
        let req = AllocationRequest::new(far, 10.0, 1e-4, 1.0, None).unwrap();
        let a = allocate_from_table(&req, &t).unwrap();
        assert_eq!(a.p_s(), 10.0);
        assert_eq!(a.p_r(), &[0.0, 0.0]);

        let one = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let req = AllocationRequest::new(one, 10.0, 1e-4, 1.0, None).unwrap();
        let f = allocate_from_table(&req, &t).unwrap().fractions();
        assert!((f[0] - 2.0 / 3.0).abs() < 0.02 && (f[1] - 1.0 / 3.0).abs() < 0.02, "{f:?}");
    }

    #[test]
    fn centered_table_reproduces_closed_form() {
        // Single cell centred on the partner, lambda_max chosen so that 4/3 is a code.
        let spec = TableSpec {
            dsr_range: (0.4, 0.6),
            drd_range: (0.4, 0.6),
            n_dsr: 1,
            n_drd: 1,
            lambda_max: 4.0 / 3.0 * 254.0 / 200.0,
            cutoff: 0.0,
            alpha: 2.0,
        };
        let t = LambdaTable::build(&spec).unwrap();
        assert_eq!(t.cell(0, 0), 200);
        let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let req = AllocationRequest::new(links, 10.0, 1e-4, 1.0, None).unwrap();
        let a = allocate_from_table(&req, &t).unwrap();
        let b = allocate_closed_form(&req).unwrap();
        assert!((a.p_s() - b.p_s()).abs() < 1e-12);
        assert!((a.p_r()[0] - b.p_r()[0]).abs() < 1e-12);
    }

    #[test]
    fn alpha_mismatch_is_rejected() {
        let t = LambdaTable::build(&TableSpec::compact(3.0)).unwrap();
        let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let req = AllocationRequest::new(links, 10.0, 1e-4, 1.0, None).unwrap();
        assert!(allocate_from_table(&req, &t).is_err());
    }
}
