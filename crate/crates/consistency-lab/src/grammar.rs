//! Text mini-grammar for densities, location grids, and prior weight
//! recipes, as used on the command line.
//!
//! The density forms round-trip with [`DensitySpec`]'s `Display` output:
//!
//! ```text
//! normal(mu=0,sigma=1)
//! spiked(eps=0.2,m=4)
//! hist(breaks=[0,0.5,1],heights=[1.5,0.5])
//! stdnormal
//! laplace(scale=1)
//! ```
//!
//! plus `grid(lo=-3,hi=3,step=0.1,sigma=1)` for location-grid priors and
//! `uniform` / `powerlaw(p=4)` for weight recipes. Whitespace is ignored
//! and named arguments may appear in any order.

use crate::densities::DensitySpec;
use crate::error::{Error, Result};
use crate::priors::LocationGridPrior;

/// A parsed named-argument call: `name(key=value, ...)` or a bare `name`.
struct Call {
    name: String,
    args: Vec<(String, Value)>,
}

enum Value {
    Number(f64),
    List(Vec<f64>),
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_number(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(format!("expected a number, got \"{}\"", text.trim())))
}

/// Split on commas that sit outside brackets.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in text.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn parse_value(text: &str) -> Result<Value> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| parse_err(format!("unclosed list in \"{text}\"")))?;
        let items = split_top_level(inner)
            .into_iter()
            .map(parse_number)
            .collect::<Result<Vec<f64>>>()?;
        Ok(Value::List(items))
    } else {
        Ok(Value::Number(parse_number(text)?))
    }
}

fn parse_call(text: &str) -> Result<Call> {
    let text = text.trim();
    if text.is_empty() {
        return Err(parse_err("empty specification"));
    }
    let Some(open) = text.find('(') else {
        if text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Ok(Call {
                name: text.to_string(),
                args: Vec::new(),
            });
        }
        return Err(parse_err(format!("malformed specification \"{text}\"")));
    };
    let name = text[..open].trim().to_string();
    let rest = &text[open + 1..];
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| parse_err(format!("missing closing parenthesis in \"{text}\"")))?;
    let mut args = Vec::new();
    for part in split_top_level(inner) {
        let part = part.trim();
        if part.is_empty() {
            return Err(parse_err(format!("empty argument in \"{text}\"")));
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(format!("argument \"{part}\" is not key=value")))?;
        args.push((key.trim().to_string(), parse_value(value)?));
    }
    Ok(Call { name, args })
}

impl Call {
    fn expect_args(&self, keys: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !keys.contains(&k.as_str()) {
                return Err(parse_err(format!(
                    "unknown argument \"{k}\" for {} (expected {})",
                    self.name,
                    keys.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn number(&self, key: &str) -> Result<f64> {
        for (k, v) in &self.args {
            if k == key {
                return match v {
                    Value::Number(x) => Ok(*x),
                    Value::List(_) => {
                        Err(parse_err(format!("argument \"{key}\" must be a number")))
                    }
                };
            }
        }
        Err(parse_err(format!(
            "{} is missing argument \"{key}\"",
            self.name
        )))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        for (k, v) in &self.args {
            if k == key {
                return match v {
                    Value::List(xs) => Ok(xs.clone()),
                    Value::Number(_) => {
                        Err(parse_err(format!("argument \"{key}\" must be a list [..]")))
                    }
                };
            }
        }
        Err(parse_err(format!(
            "{} is missing argument \"{key}\"",
            self.name
        )))
    }
}

/// Parse a density specification.
pub fn parse_density(text: &str) -> Result<DensitySpec> {
    let call = parse_call(text)?;
    match call.name.as_str() {
        "normal" => {
            call.expect_args(&["mu", "sigma"])?;
            DensitySpec::normal(call.number("mu")?, call.number("sigma")?)
        }
        "spiked" => {
            call.expect_args(&["eps", "m"])?;
            DensitySpec::spiked_uniform(call.number("eps")?, call.number("m")?)
        }
        "hist" => {
            call.expect_args(&["breaks", "heights"])?;
            DensitySpec::histogram(call.list("breaks")?, call.list("heights")?)
        }
        "stdnormal" => {
            call.expect_args(&[])?;
            Ok(DensitySpec::std_normal())
        }
        "laplace" => {
            call.expect_args(&["scale"])?;
            DensitySpec::laplace(call.number("scale")?)
        }
        other => Err(parse_err(format!(
            "unknown density \"{other}\" (expected normal, spiked, hist, stdnormal, laplace)"
        ))),
    }
}

/// Parse a location-grid specification `grid(lo=..,hi=..,step=..,sigma=..)`.
pub fn parse_grid(text: &str) -> Result<LocationGridPrior> {
    let call = parse_call(text)?;
    if call.name != "grid" {
        return Err(parse_err(format!(
            "expected grid(lo=..,hi=..,step=..,sigma=..), got \"{}\"",
            call.name
        )));
    }
    call.expect_args(&["lo", "hi", "step", "sigma"])?;
    LocationGridPrior::new(
        call.number("lo")?,
        call.number("hi")?,
        call.number("step")?,
        call.number("sigma")?,
    )
}

/// A prior-weight recipe over an ordered support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Uniform,
    /// Weight of the `i`-th point (1-based) proportional to `i^-p`.
    PowerLaw { p: f64 },
}

impl WeightSpec {
    /// Unnormalized weights for a support of size `k`.
    pub fn weights(&self, k: usize) -> Vec<f64> {
        match self {
            WeightSpec::Uniform => vec![1.0; k],
            WeightSpec::PowerLaw { p } => {
                (1..=k).map(|i| (i as f64).powf(-p)).collect()
            }
        }
    }
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightSpec::Uniform => write!(f, "uniform"),
            WeightSpec::PowerLaw { p } => write!(f, "powerlaw(p={p})"),
        }
    }
}

/// Parse a weight recipe: `uniform` or `powerlaw(p=..)`.
pub fn parse_weights(text: &str) -> Result<WeightSpec> {
    let call = parse_call(text)?;
    match call.name.as_str() {
        "uniform" => {
            call.expect_args(&[])?;
            Ok(WeightSpec::Uniform)
        }
        "powerlaw" => {
            call.expect_args(&["p"])?;
            let p = call.number("p")?;
            if !(p > 0.0) {
                return Err(parse_err(format!("powerlaw exponent must be positive, got {p}")));
            }
            Ok(WeightSpec::PowerLaw { p })
        }
        other => Err(parse_err(format!(
            "unknown weight recipe \"{other}\" (expected uniform or powerlaw)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_display_round_trips() {
        let specs = vec![
            DensitySpec::normal(0.5, 2.0).unwrap(),
            DensitySpec::spiked_uniform(0.2, 4.0).unwrap(),
            DensitySpec::histogram(vec![0.0, 0.25, 1.0], vec![2.0, 0.5 / 0.75]).unwrap(),
            DensitySpec::std_normal(),
            DensitySpec::laplace(1.5).unwrap(),
        ];
        for spec in specs {
            let text = spec.to_string();
            let back = parse_density(&text).unwrap();
            assert_eq!(back.to_string(), text, "round trip through \"{text}\"");
        }
    }

    #[test]
    fn whitespace_and_argument_order_are_free() {
        let a = parse_density("normal( sigma = 1 , mu = 0 )").unwrap();
        let b = parse_density("normal(mu=0,sigma=1)").unwrap();
        assert_eq!(a.to_string(), b.to_string());
        let h = parse_density("hist( heights = [ 1 , 1 ] , breaks = [ 0 , 0.5 , 1 ] )").unwrap();
        assert_eq!(h.to_string(), "hist(breaks=[0,0.5,1],heights=[1,1])");
    }

    #[test]
    fn malformed_densities_are_rejected() {
        for bad in [
            "",
            "normal(mu=0)",                      // missing sigma
            "normal(mu=0,sigma=1,tail=2)",       // unknown argument
            "normal(mu=zero,sigma=1)",           // bad number
            "normal(mu=0,sigma=1",               // unclosed paren
            "cauchy(scale=1)",                   // unknown family
            "stdnormal(x=1)",                    // arguments on a bare name
            "hist(breaks=[0,1],heights=1)",      // scalar where list expected
            "hist(breaks=[0,1,heights=[1])",     // unclosed list
            "laplace(scale)",                    // not key=value
        ] {
            assert!(parse_density(bad).is_err(), "accepted \"{bad}\"");
        }
        // Invalid parameters pass parsing but fail construction.
        assert!(parse_density("normal(mu=0,sigma=-1)").is_err());
    }

    #[test]
    fn grid_parses() {
        let grid = parse_grid("grid(lo=-3,hi=3,step=0.5,sigma=1)").unwrap();
        let prior = grid.materialize().unwrap();
        assert_eq!(prior.points().len(), 13);
        assert!(parse_grid("grid(lo=-3,hi=3,step=0.5)").is_err());
        assert!(parse_grid("normal(mu=0,sigma=1)").is_err());
    }

    #[test]
    fn weight_recipes_parse_and_render() {
        assert_eq!(parse_weights("uniform").unwrap(), WeightSpec::Uniform);
        let p = parse_weights("powerlaw(p=4)").unwrap();
        assert_eq!(p, WeightSpec::PowerLaw { p: 4.0 });
        assert_eq!(p.to_string(), "powerlaw(p=4)");
        assert_eq!(p.weights(3), vec![1.0, 2.0_f64.powf(-4.0), 3.0_f64.powf(-4.0)]);
        assert_eq!(WeightSpec::Uniform.weights(2), vec![1.0, 1.0]);
        assert!(parse_weights("powerlaw(p=0)").is_err());
        assert!(parse_weights("gaussian").is_err());
    }
}
