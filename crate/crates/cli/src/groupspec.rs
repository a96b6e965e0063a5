//! Group specifications on the command line.
//!
//! Forms:
//! - `cyclic:<g>`
//! - `semidirect:<q>,<p>,<phi>:<a>,<A>`   (a^q = A^p = 1, A a A^{-1} = a^phi)
//! - `product:<p>:<a>,<A>`                (Z_p × Z_p)
//! - `s3:<s>,<t>`                         (alias for semidirect:3,2,-1:<t>,<s>)
//! - `zNxzN:<a>,<A>`                      (alias for product:N)

use orbifold_core::lattice::LatticeMap;
use orbifold_core::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub enum GroupSpec {
    Cyclic { g: String },
    Semidirect { q: u64, p: u64, phi: i64, a: String, big_a: String },
    Product { p: u64, a: String, big_a: String },
}

impl GroupSpec {
    pub fn parse(s: &str) -> Result<GroupSpec> {
        let bad = || Error::ParseError(format!("bad group spec: {s}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "cyclic" => Ok(GroupSpec::Cyclic { g: rest.to_string() }),
            "semidirect" => {
                let (params, gens) = rest.split_once(':').ok_or_else(bad)?;
                let ps: Vec<&str> = params.split(',').collect();
                let gs: Vec<&str> = gens.split(',').collect();
                if ps.len() != 3 || gs.len() != 2 {
                    return Err(bad());
                }
                Ok(GroupSpec::Semidirect {
                    q: ps[0].parse().map_err(|_| bad())?,
                    p: ps[1].parse().map_err(|_| bad())?,
                    phi: ps[2].parse().map_err(|_| bad())?,
                    a: gs[0].to_string(),
                    big_a: gs[1].to_string(),
                })
            }
            "product" => {
                let (param, gens) = rest.split_once(':').ok_or_else(bad)?;
                let gs: Vec<&str> = gens.split(',').collect();
                if gs.len() != 2 {
                    return Err(bad());
                }
                Ok(GroupSpec::Product {
                    p: param.parse().map_err(|_| bad())?,
                    a: gs[0].to_string(),
                    big_a: gs[1].to_string(),
                })
            }
            "s3" => {
                let gs: Vec<&str> = rest.split(',').collect();
                if gs.len() != 2 {
                    return Err(bad());
                }
                // s3:s,t — s the involution, t the 3-cycle
                Ok(GroupSpec::Semidirect {
                    q: 3,
                    p: 2,
                    phi: -1,
                    a: gs[1].to_string(),
                    big_a: gs[0].to_string(),
                })
            }
            k if k.starts_with('z') && k.contains("xz") => {
                let body = &k[1..];
                let (n1, n2) = body.split_once("xz").ok_or_else(bad)?;
                let n1: u64 = n1.parse().map_err(|_| bad())?;
                let n2: u64 = n2.parse().map_err(|_| bad())?;
                if n1 != n2 {
                    return Err(bad());
                }
                let gs: Vec<&str> = rest.split(',').collect();
                if gs.len() != 2 {
                    return Err(bad());
                }
                Ok(GroupSpec::Product { p: n1, a: gs[0].to_string(), big_a: gs[1].to_string() })
            }
            _ => Err(bad()),
        }
    }

    pub fn generator_names(&self) -> Vec<&str> {
        match self {
            GroupSpec::Cyclic { g } => vec![g],
            GroupSpec::Semidirect { a, big_a, .. } | GroupSpec::Product { a, big_a, .. } => {
                vec![a, big_a]
            }
        }
    }

    pub fn resolve<'m>(
        &self,
        maps: &'m BTreeMap<String, LatticeMap>,
    ) -> Result<Vec<(&str, &'m LatticeMap)>> {
        self.generator_names()
            .into_iter()
            .map(|n| {
                maps.get(n)
                    .map(|m| (n, m))
                    .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{n}'")))
            })
            .collect()
    }
}
