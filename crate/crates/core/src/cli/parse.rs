//! Compact command-line spellings of strategies and distributions.
//!
//! Strategies: `fixed:λ`, `kt[:C]`, `kt-pc[:C]`, `grapa[:scale]`,
//! `agrapa[:C]`, `hedged[:α[:C]]`, `beta-up[:atom0]`, `beta:a:b[:atom0]`,
//! `robbins`, `intermittent:α:<inner>`, `leveraged:ρ:<inner>`.
//! Distributions: `bernoulli:p`, `beta:a:b`, `point:m`, `normal:μ:σ`,
//! `discrete:x1,x2,…:p1,p2,…`. Either may also be given as a JSON object.

use crate::strategies::{self, Strategy};
use crate::simlab::DistSpec;

fn num(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
}

fn nums(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(num).collect()
}

fn arity(name: &str, args: &[&str], lo: usize, hi: usize) -> Result<(), String> {
    if args.len() < lo || args.len() > hi {
        return Err(format!("{name} takes {lo} to {hi} parameters, got {}", args.len()));
    }
    Ok(())
}

pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("strategy JSON: {e}"));
    }
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    // wrappers take the remainder after their own parameter as the inner strategy
    if name == "intermittent" || name == "leveraged" {
        let (p, inner) = rest
            .split_once(':')
            .ok_or_else(|| format!("{name} needs a parameter and an inner strategy"))?;
        let p = num(p)?;
        let inner = parse_strategy(inner)?;
        return Ok(if name == "intermittent" {
            strategies::intermittent(inner, p)
        } else {
            strategies::opportunistic_leverage(inner, p)
        });
    }
    let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let arg = |i: usize| -> Result<Option<f64>, String> { args.get(i).map(|a| num(a)).transpose() };
    Ok(match name {
        "fixed" => {
            arity(name, &args, 1, 1)?;
            strategies::fixed_fraction(num(args[0])?)
        }
        "kt" | "kt-pc" => {
            arity(name, &args, 0, 1)?;
            Strategy::Kt {
                c: arg(0)?,
                numerator: if name == "kt" {
                    strategies::KtNumerator::Half
                } else {
                    strategies::KtNumerator::PseudoCount
                },
                bound_scale: 1.0,
            }
        }
        "grapa" => {
            arity(name, &args, 0, 1)?;
            Strategy::grapa(arg(0)?.unwrap_or(1.0))
        }
        "agrapa" => {
            arity(name, &args, 0, 1)?;
            Strategy::agrapa(arg(0)?.unwrap_or(strategies::agrapa::DEFAULT_CLIP))
        }
        "hedged" => {
            arity(name, &args, 0, 2)?;
            Strategy::hedged(
                arg(0)?.unwrap_or(strategies::hedged::DEFAULT_ALPHA),
                arg(1)?.unwrap_or(strategies::hedged::DEFAULT_CLIP),
            )
        }
        "beta-up" => {
            arity(name, &args, 0, 1)?;
            Strategy::beta_mixture(arg(0)?.unwrap_or(0.0), 0.5, 0.5)
        }
        "beta" => {
            arity(name, &args, 2, 3)?;
            Strategy::beta_mixture(arg(2)?.unwrap_or(0.0), num(args[0])?, num(args[1])?)
        }
        "robbins" => {
            arity(name, &args, 0, 0)?;
            Strategy::robbins_mixture()
        }
        _ => return Err(format!("unknown strategy {name:?}")),
    })
}

pub fn parse_dist(s: &str) -> Result<DistSpec, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("distribution JSON: {e}"));
    }
    let mut parts = s.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let d = match name {
        "bernoulli" => {
            arity(name, &args, 1, 1)?;
            DistSpec::Bernoulli { p: num(args[0])? }
        }
        "beta" => {
            arity(name, &args, 2, 2)?;
            DistSpec::ScaledBeta {
                a: num(args[0])?,
                b: num(args[1])?,
            }
        }
        "point" => {
            arity(name, &args, 1, 1)?;
            DistSpec::PointMass { m: num(args[0])? }
        }
        "normal" => {
            arity(name, &args, 2, 2)?;
            DistSpec::Normal {
                mu: num(args[0])?,
                sigma: num(args[1])?,
            }
        }
        "discrete" => {
            arity(name, &args, 2, 2)?;
            DistSpec::DiscreteOn01 {
                points: nums(args[0])?,
                probs: nums(args[1])?,
            }
        }
        _ => return Err(format!("unknown distribution {name:?}")),
    };
    d.validate().map_err(|e| e.to_string())?;
    Ok(d)
}
