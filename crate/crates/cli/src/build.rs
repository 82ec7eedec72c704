//! Immersions from a [`RunConfig`].

use std::str::FromStr;

use austere_core::families::*;
use austere_core::geometry::Immersion;
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::CliError;

fn allowed(family: &str) -> &'static [&'static str] {
    match family {
        "helicoid" => &["m", "s", "lambdas", "extended_ruling", "domain"],
        "classical_helicoid" => &["b"],
        "helicoid_cone" => &["lambda"],
        "helicoid_product" => &["b1", "b2"],
        "helicoid_flat" => &["b", "k"],
        "complex_cone" | "complex_cylinder" => &["curve", "domain", "orientation"],
        "sphere" => &["n", "r"],
        "flat" => &["m", "n"],
        _ => &[],
    }
}

/// Polynomial components separated by `;`, coefficients (constant term
/// first) by `,`; each coefficient is a complex literal such as `2`,
/// `-1.5i` or `0.5+2i`.
pub fn parse_curve(text: &str) -> Result<Vec<Vec<Complex64>>, CliError> {
    text.split(';')
        .map(|comp| {
            comp.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|c| {
                    Complex64::from_str(c).map_err(|_| {
                        CliError::config("params.curve", format!("bad coefficient `{c}`"))
                    })
                })
                .collect()
        })
        .collect()
}

fn family_err(e: FamilyError) -> CliError {
    match e {
        FamilyError::Invalid { field, reason } => {
            CliError::config(&format!("params.{field}"), reason)
        }
        FamilyError::Geometry(g) => CliError::config("params", g.to_string()),
    }
}

pub fn build_immersion(cfg: &RunConfig) -> Result<Immersion, CliError> {
    cfg.validate()?;
    let ok = allowed(&cfg.family);
    if let Some(bad) = cfg.params.keys().find(|k| !ok.contains(&k.as_str())) {
        return Err(CliError::config(
            &format!("params.{bad}"),
            format!(
                "not a parameter of `{}` (expected one of: {})",
                cfg.family,
                ok.join(", ")
            ),
        ));
    }
    match cfg.family.as_str() {
        "helicoid" => {
            let m: usize = cfg.param("m", 2)?;
            let s: usize = cfg.param("s", 1)?;
            let lambdas = cfg
                .param_list("lambdas")?
                .unwrap_or_else(|| vec![1.0; s + 1]);
            let mut spec = HelicoidSpec::new(m, s, lambdas).map_err(family_err)?;
            if let Some(d) = cfg.param_domain()? {
                spec = spec.with_domain(d).map_err(family_err)?;
            }
            if cfg.param_bool("extended_ruling")? {
                spec = spec.with_extended_ruling();
            }
            generalized_helicoid(&spec).map_err(family_err)
        }
        "classical_helicoid" => classical_helicoid(cfg.param("b", 1.0)?).map_err(family_err),
        "helicoid_cone" => helicoid_cone(cfg.param("lambda", 1.0)?).map_err(family_err),
        "helicoid_product" => {
            let a = classical_helicoid(cfg.param("b1", 1.0)?).map_err(family_err)?;
            let b = classical_helicoid(cfg.param("b2", 0.5)?).map_err(family_err)?;
            product_immersion(&a, &b).map_err(family_err)
        }
        "helicoid_flat" => {
            let h = classical_helicoid(cfg.param("b", 1.0)?).map_err(family_err)?;
            let k: usize = cfg.param("k", 2)?;
            product_immersion(&h, &euclidean_factor(k).map_err(family_err)?).map_err(family_err)
        }
        name @ ("complex_cone" | "complex_cylinder") => {
            let default = if name == "complex_cone" {
                "1; 0,1; 0,0,1"
            } else {
                "0,1; 0,0,1"
            };
            let text = cfg.params.get("curve").map_or(default, String::as_str);
            let mut spec = HoloCurveSpec::new(parse_curve(text)?).map_err(family_err)?;
            if let Some(d) = cfg.param_domain()? {
                spec = spec.with_domain(d).map_err(family_err)?;
            }
            if name == "complex_cone" {
                complex_cone(&spec)
            } else {
                complex_cylinder(&spec)
            }
            .map_err(family_err)
        }
        "sphere" => sphere(cfg.param("n", 3)?, cfg.param("r", 1.0)?).map_err(family_err),
        "flat" => flat(cfg.param("m", 2)?, cfg.param("n", 3)?).map_err(family_err),
        other => unreachable!("validated family {other}"),
    }
}
