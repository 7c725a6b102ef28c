//! Group definition files: a small JSON schema describing how to build a
//! group, shared by the command-line tools and the test suites.
//!
//! ```json
//! {"type": "ut", "n": 3, "p": 2}
//! {"type": "cayley", "table": [[0, 1], [1, 0]]}
//! {"type": "abelian", "invariants": [4, 2]}
//! {"type": "product", "factors": [{"type": "abelian", "invariants": [2]},
//!                                  {"type": "ut", "n": 3, "p": 2}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::group::{self, Group, GroupError};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GroupSpec {
    Ut { n: usize, p: u32 },
    Cayley { table: Vec<Vec<usize>> },
    Abelian { invariants: Vec<u32> },
    Product { factors: Vec<GroupSpec> },
}

impl GroupSpec {
    /// Build the group, enforcing the order cap on every constructor.
    pub fn build(&self, order_cap: usize) -> Result<Group, GroupError> {
        let g = match self {
            GroupSpec::Ut { n, p } => group::ut_with_cap(*n, *p, order_cap)?,
            GroupSpec::Cayley { table } => group::group_from_cayley(table)?,
            GroupSpec::Abelian { invariants } => group::abelian(invariants),
            GroupSpec::Product { factors } => {
                let built: Vec<Group> = factors
                    .iter()
                    .map(|f| f.build(order_cap))
                    .collect::<Result<_, _>>()?;
                group::product(&built)
            }
        };
        if g.order() > order_cap {
            return Err(GroupError::SizeCapExceeded {
                required: g.order(),
                cap: order_cap,
            });
        }
        Ok(g)
    }

    /// A short deterministic description used in reports.
    pub fn label(&self) -> String {
        match self {
            GroupSpec::Ut { n, p } => format!("ut({n},{p})"),
            GroupSpec::Cayley { table } => format!("cayley(order {})", table.len()),
            GroupSpec::Abelian { invariants } => {
                let parts: Vec<String> = invariants.iter().map(u32::to_string).collect();
                format!("abelian[{}]", parts.join(","))
            }
            GroupSpec::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(GroupSpec::label).collect();
                parts.join(" x ")
            }
        }
    }
}
