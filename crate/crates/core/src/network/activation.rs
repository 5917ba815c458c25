use std::fmt;
use std::str::FromStr;

/// Transfer function applied to `u_k + b_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    /// 1 when the net input is at or above zero, else 0. No gradient.
    Hardlimit,
    Sigmoid,
    Tanh,
    Linear,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Hardlimit => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation output `y = apply(z)`,
    /// or `None` for hardlimit.
    pub fn derivative_from_output(self, y: f64) -> Option<f64> {
        match self {
            Activation::Hardlimit => None,
            Activation::Sigmoid => Some(y * (1.0 - y)),
            Activation::Tanh => Some(1.0 - y * y),
            Activation::Linear => Some(1.0),
        }
    }

    pub fn is_differentiable(self) -> bool {
        !matches!(self, Activation::Hardlimit)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Hardlimit => "hardlimit",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hardlimit" | "hardlim" => Ok(Activation::Hardlimit),
            "sigmoid" | "logsig" => Ok(Activation::Sigmoid),
            "tanh" | "tansig" => Ok(Activation::Tanh),
            "linear" | "purelin" => Ok(Activation::Linear),
            other => Err(format!("unknown activation '{other}'")),
        }
    }
}
