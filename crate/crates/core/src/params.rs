use core::fmt;

/// A parameter that violates its documented constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamError {
    pub name: &'static str,
    pub constraint: &'static str,
    pub value: f64,
}

impl ParamError {
    pub(crate) fn new(name: &'static str, constraint: &'static str, value: f64) -> Self {
        Self {
            name,
            constraint,
            value,
        }
    }
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} violates constraint \"{}\"",
            self.name, self.value, self.constraint
        )
    }
}

impl core::error::Error for ParamError {}

/// Checks `cond`, reporting the named constraint on failure. NaN always fails
/// because every condition is written as a positive comparison.
pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    constraint: &'static str,
    value: f64,
) -> Result<(), ParamError> {
    if cond {
        Ok(())
    } else {
        Err(ParamError::new(name, constraint, value))
    }
}
