use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

use super::future::FutureRef;
use crate::il::ValueKind;

/// A runtime value. Arrays are reference types; everything else is copied.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Array(ArrayRef),
    Future(FutureRef),
    Void,
}

impl Value {
    /// Initial content of a slot or array element of `kind`.
    pub fn default_for(kind: &ValueKind) -> Value {
        match kind {
            ValueKind::Int => Value::Int(0),
            ValueKind::Float => Value::Float(0.0),
            ValueKind::Bool => Value::Bool(false),
            ValueKind::Array(elem) => Value::Array(ArrayRef::new((**elem).clone(), Vec::new())),
            ValueKind::Future(_) | ValueKind::Void => Value::Void,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Float(_) => "Float",
            Value::Bool(_) => "Bool",
            Value::Array(_) => "Array",
            Value::Future(_) => "Future",
            Value::Void => "Void",
        }
    }

    /// Whether the value may be stored in a slot of `kind`. Array element
    /// kinds are compared exactly; future payloads are not inspected. An
    /// uninitialized (`Void`) future slot accepts `Void`.
    pub fn conforms_to(&self, kind: &ValueKind) -> bool {
        match (self, kind) {
            (Value::Int(_), ValueKind::Int)
            | (Value::Float(_), ValueKind::Float)
            | (Value::Bool(_), ValueKind::Bool) => true,
            (Value::Array(a), ValueKind::Array(elem)) => a.elem_kind() == &**elem,
            (Value::Future(_) | Value::Void, ValueKind::Future(_)) => true,
            _ => false,
        }
    }

    /// Copies arrays recursively so the result shares no mutable state with
    /// `self`. Futures are shared; their content never changes once set.
    pub fn deep_copy(&self) -> Value {
        match self {
            Value::Array(a) => Value::Array(a.deep_copy()),
            other => other.clone(),
        }
    }

    /// Structural equality with floats compared by bit pattern (all NaNs
    /// equal). Filled futures compare by content, pending ones by identity.
    pub fn bit_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Void, Value::Void) => true,
            (Value::Array(a), Value::Array(b)) => {
                if a.ptr_eq(b) {
                    return true;
                }
                let (x, y) = (a.lock(), b.lock());
                a.elem_kind() == b.elem_kind() && x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| p.bit_eq(q))
            }
            (Value::Future(a), Value::Future(b)) => match (a.try_get(), b.try_get()) {
                (Some(Ok(x)), Some(Ok(y))) => x.bit_eq(&y),
                (Some(Err(x)), Some(Err(y))) => x == y,
                (None, None) => a.ptr_eq(b),
                _ => false,
            },
            _ => false,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    /// Flattens an `Array<Int>` into a vector.
    pub fn to_int_vec(&self) -> Option<Vec<i64>> {
        match self {
            Value::Array(a) => a.lock().iter().map(Value::as_int).collect(),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) if v.is_nan() => f.write_str("NaN"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Void => f.write_str("void"),
            Value::Array(a) => {
                f.write_str("[")?;
                for (i, v) in a.lock().iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Future(fut) => match fut.try_get() {
                Some(Ok(v)) => write!(f, "future({v})"),
                Some(Err(t)) => write!(f, "future(trap: {t})"),
                None => f.write_str("future(pending)"),
            },
        }
    }
}

#[derive(Debug)]
struct ArrayCell {
    elem: ValueKind,
    data: Mutex<Vec<Value>>,
}

/// Shared, mutable, typed array.
///
/// An array is only ever reachable from one thread of control at a time:
/// arguments are deep-copied into tasks and a task's result is handed over
/// once through its future. The mutex only makes that hand-over `Sync`.
#[derive(Debug, Clone)]
pub struct ArrayRef(Arc<ArrayCell>);

impl ArrayRef {
    pub fn new(elem: ValueKind, data: Vec<Value>) -> Self {
        Self(Arc::new(ArrayCell { elem, data: Mutex::new(data) }))
    }

    pub fn from_ints(data: impl IntoIterator<Item = i64>) -> Self {
        Self::new(ValueKind::Int, data.into_iter().map(Value::Int).collect())
    }

    pub fn elem_kind(&self) -> &ValueKind {
        &self.0.elem
    }

    pub fn lock(&self) -> MutexGuard<'_, Vec<Value>> {
        // A poisoned lock can only come from a panic elsewhere; the data is
        // still a plain vector.
        self.0.data.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ptr_eq(&self, other: &ArrayRef) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn deep_copy(&self) -> ArrayRef {
        let data = self.lock().iter().map(Value::deep_copy).collect();
        ArrayRef::new(self.0.elem.clone(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deep_copy_isolates_nested_arrays() {
        let inner = ArrayRef::from_ints([1, 2]);
        let outer = Value::Array(ArrayRef::new(ValueKind::array_of(ValueKind::Int), vec![Value::Array(inner.clone())]));
        let copy = outer.deep_copy();
        inner.lock()[0] = Value::Int(99);
        let Value::Array(c) = &copy else { unreachable!() };
        let Value::Array(ci) = c.lock()[0].clone() else { unreachable!() };
        assert_eq!(ci.lock()[0].as_int(), Some(1));
        assert!(!copy.bit_eq(&outer));
    }

    #[test]
    fn conformance() {
        let ints = Value::Array(ArrayRef::from_ints([1]));
        assert!(ints.conforms_to(&ValueKind::array_of(ValueKind::Int)));
        assert!(!ints.conforms_to(&ValueKind::array_of(ValueKind::Float)));
        assert!(Value::Void.conforms_to(&ValueKind::future_of(ValueKind::Int)));
        assert!(!Value::Int(1).conforms_to(&ValueKind::Float));
    }

    #[test]
    fn float_bit_equality() {
        assert!(Value::Float(f64::NAN).bit_eq(&Value::Float(f64::NAN)));
        assert!(!Value::Float(0.0).bit_eq(&Value::Float(-0.0)));
    }
}
