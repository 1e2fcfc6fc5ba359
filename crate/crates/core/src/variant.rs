use std::fmt;
use std::str::FromStr;

/// Which form of a closed-form approximation to evaluate.
///
/// `AsPrinted` follows the published statement literally. `Amended` applies the
/// corrections established by direct evaluation: the reciprocal Pochhammer prefactor
/// for the confluent series, the unshifted odd-degree argument for the `h` family, and
/// `z = exp(+2 pi v)` for the q-Laguerre argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FormulaVariant {
    #[default]
    AsPrinted,
    Amended,
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AsPrinted => "as-printed",
            Self::Amended => "amended",
        })
    }
}

impl FromStr for FormulaVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as-printed" | "printed" => Ok(Self::AsPrinted),
            "amended" => Ok(Self::Amended),
            other => Err(format!("unknown formula variant '{other}'")),
        }
    }
}
