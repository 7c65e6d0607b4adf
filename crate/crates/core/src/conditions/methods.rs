//! Built-in tableaus, stored as entry literals.

use serde_json::{json, Value};

use super::tableau::{LoadOptions, Tableau, TableauError};

pub const BUILTIN_NAMES: &[&str] = &["euler", "rk4", "fake5", "fake6"];

const EULER: (u64, &[&str], &[&[&str]], &[&str]) = (0, &["0"], &[&[]], &["1"]);

const RK4: (u64, &[&str], &[&[&str]], &[&str]) = (
    0,
    &["0", "1/2", "1/2", "1"],
    &[&[], &["1/2"], &["0", "1/2"], &["0", "0", "1"]],
    &["1/6", "1/3", "1/3", "1/6"],
);

/// Six stages, order 5 for scalar non-autonomous problems but only 4 for systems.
const FAKE5: (u64, &[&str], &[&[&str]], &[&str]) = (
    0,
    &["0", "1/4", "1/2", "3/4", "3/10", "1"],
    &[
        &[],
        &["1/4"],
        &["-1/2", "1"],
        &["3/16", "0", "9/16"],
        &["291/2500", "108/625", "63/2500", "-9/625"],
        &["-146/135", "152/15", "-7/15", "428/405", "-700/81"],
    ],
    &["5/54", "0", "0", "32/81", "250/567", "1/14"],
);

/// Eight stages over `Q(√415)`, order 6 for scalar non-autonomous problems
/// but only 5 for systems. `a_73` is the value forced by `c_7 = Σ_j a_7j`.
const FAKE6: (u64, &[&str], &[&[&str]], &[&str]) = (
    415,
    &["0", "1/2", "1", "1/5", "2/5", "3/5", "1", "4/5"],
    &[
        &[],
        &["1/2"],
        &["0", "1"],
        &["16/125", "13/125", "-4/125"],
        &["-136/2875|-2/2875", "-638/2875|-6/2875", "821/11500|7/11500", "275/460|1/460"],
        &[
            "2469/40250|-31/40250",
            "-777/2875|18/2875",
            "18979/241500|-326/241500",
            "895/3220|2/3220",
            "95/210|-1/210",
        ],
        &[
            "91295/45885|-6701/45885",
            "-1415/2185|12/2185",
            "15007/18354|-542/15295",
            "-42285/6118|3300/6118",
            "4115/399|-285/399",
            "-260/57|20/57",
        ],
        &[
            "-77534/181125|6878/181125",
            "1116/2875|-12/2875",
            "-3216783/14852250|103963/14852250",
            "3489/1610|-223/1610",
            "-918/315|58/315",
            "82/45|-4/45",
            "-285/15375|38/15375",
        ],
    ],
    &["19/288", "0", "0", "25/96", "25/144", "25/144", "19/288", "25/96"],
);

/// The tableau document for a built-in method.
pub fn builtin_json(name: &str) -> Result<Value, TableauError> {
    let (d, c, a, b) = match name {
        "euler" => EULER,
        "rk4" => RK4,
        "fake5" => FAKE5,
        "fake6" => FAKE6,
        other => return Err(TableauError::UnknownBuiltin(other.to_string())),
    };
    Ok(json!({ "s": b.len(), "sqrt_discriminant": d, "c": c, "A": a, "b": b }))
}

/// One of `euler`, `rk4`, `fake5`, `fake6`.
pub fn builtin(name: &str) -> Result<Tableau, TableauError> {
    Tableau::from_json(&builtin_json(name)?, LoadOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactScalar;

    fn e(s: &str, d: u64) -> ExactScalar {
        ExactScalar::parse(s, d).unwrap()
    }

    #[test]
    fn all_builtins_load() {
        for name in BUILTIN_NAMES {
            let tab = builtin(name).unwrap();
            assert!(tab.is_explicit(), "{name}");
            assert!(tab.rows_consistent(), "{name}");
        }
        assert_eq!(builtin("dopri").unwrap_err(), TableauError::UnknownBuiltin("dopri".into()));
    }

    #[test]
    fn fake5_transcription() {
        let tab = builtin("fake5").unwrap();
        assert_eq!(tab.stages(), 6);
        let c: Vec<String> = tab.c().iter().map(|x| x.to_string()).collect();
        assert_eq!(c, ["0", "1/4", "1/2", "3/4", "3/10", "1"]);
        let row6: Vec<String> = tab.a()[5][..5].iter().map(|x| x.to_string()).collect();
        assert_eq!(row6, ["-146/135", "152/15", "-7/15", "428/405", "-700/81"]);
    }

    #[test]
    fn fake6_transcription() {
        let tab = builtin("fake6").unwrap();
        assert_eq!(tab.stages(), 8);
        assert_eq!(tab.discriminant(), 415);
        let c: Vec<String> = tab.c().iter().map(|x| x.to_string()).collect();
        assert_eq!(c, ["0", "1/2", "1", "1/5", "2/5", "3/5", "1", "4/5"]);
        let b: Vec<String> = tab.b().iter().map(|x| x.to_string()).collect();
        assert_eq!(b, ["19/288", "0", "0", "25/96", "25/144", "25/144", "19/288", "25/96"]);
        assert_eq!(tab.a()[4][0], e("-136/2875|-2/2875", 415));
        assert_eq!(tab.a()[6][3], e("-42285/6118|3300/6118", 415));
    }
}
