//! Named allocation schemes, as selected from configs and the CLI.

use std::fmt;
use std::str::FromStr;

use crate::allocation::{
    allocate_closed_form, allocate_epa, allocate_iterative, allocate_reference_optimum, AllocationRequest,
    EpaVariant, IterativeOptions, PowerAllocation,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::NormalizedLinks;
use crate::table::{allocate_from_table, LambdaTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    ClosedForm,
    Iterative,
    ReferenceKkt,
    EpaAll,
    EpaHalf,
    Table,
    /// Non-cooperative: all power on the direct link, no partners.
    None,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::ClosedForm,
        Scheme::Iterative,
        Scheme::ReferenceKkt,
        Scheme::EpaAll,
        Scheme::EpaHalf,
        Scheme::Table,
        Scheme::None,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::ClosedForm => "closed_form",
            Scheme::Iterative => "iterative",
            Scheme::ReferenceKkt => "reference_kkt",
            Scheme::EpaAll => "epa_all",
            Scheme::EpaHalf => "epa_half",
            Scheme::Table => "table",
            Scheme::None => "none",
        }
    }

    /// Allocates `req` under this scheme. `table` is required by
    /// [`Scheme::Table`] and ignored otherwise.
    pub fn allocate(self, req: &AllocationRequest, table: Option<&LambdaTable>) -> Result<SchemeAllocation> {
        let links = req.links.clone();
        let allocation = match self {
            Scheme::ClosedForm => allocate_closed_form(req)?,
            Scheme::Iterative => allocate_iterative(req, IterativeOptions::default())?.allocation,
            Scheme::ReferenceKkt => allocate_reference_optimum(req)?,
            Scheme::EpaAll => allocate_epa(req, EpaVariant::AllEqual)?,
            Scheme::EpaHalf => allocate_epa(req, EpaVariant::HalfSource)?,
            Scheme::Table => {
                let table = table.ok_or_else(|| invalid("scheme `table` needs a lookup table"))?;
                allocate_from_table(req, table)?
            }
            Scheme::None => {
                return Ok(SchemeAllocation {
                    allocation: PowerAllocation::new(req.p_total, vec![])?,
                    links: links.direct_only(),
                })
            }
        };
        Ok(SchemeAllocation { allocation, links })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.id() == s)
            .ok_or_else(|| invalid(format!("unknown scheme `{s}`")))
    }
}

/// An allocation together with the link set it was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAllocation {
    pub allocation: PowerAllocation,
    pub links: NormalizedLinks,
}

impl SchemeAllocation {
    /// Drops zero-power partners: they do not transmit and take no slot.
    pub fn active(&self) -> Result<(NormalizedLinks, PowerAllocation)> {
        let p_r = self.allocation.p_r();
        let links = self.links.filter(|i| p_r[i] > 0.0);
        let active = PowerAllocation::new(
            self.allocation.p_s(),
            p_r.iter().copied().filter(|&p| p > 0.0).collect(),
        )?;
        Ok((links, active))
    }
}
