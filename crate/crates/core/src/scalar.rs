use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point type used by the property, similarity and assessment layers.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable as float")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
