//! Semantic types.

use alloc::boxed::Box;
use alloc::string::String;

/// Base of a semantic type, before nullability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseType {
    Int,
    Bool,
    Str,
    List(Box<SemType>),
    Record(String),
    /// Type of the `null` literal; assignable only to nullable slots.
    Null,
    /// Type of `@`, the state-variable set. Only field access applies.
    StateSet,
}

/// A semantic type: base plus nullability. A declaration is nullable iff its
/// default is `null`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemType {
    pub base: BaseType,
    pub nullable: bool,
}

impl SemType {
    pub fn int() -> Self {
        SemType {
            base: BaseType::Int,
            nullable: false,
        }
    }

    pub fn bool() -> Self {
        SemType {
            base: BaseType::Bool,
            nullable: false,
        }
    }

    pub fn str() -> Self {
        SemType {
            base: BaseType::Str,
            nullable: false,
        }
    }

    pub fn null() -> Self {
        SemType {
            base: BaseType::Null,
            nullable: true,
        }
    }

    pub fn record(name: &str) -> Self {
        SemType {
            base: BaseType::Record(String::from(name)),
            nullable: false,
        }
    }

    pub fn list(elem: SemType) -> Self {
        SemType {
            base: BaseType::List(Box::new(elem)),
            nullable: false,
        }
    }

    pub fn nullable(mut self) -> Self {
        self.nullable = true;
        self
    }

    pub fn is_null_literal(&self) -> bool {
        self.base == BaseType::Null
    }

    /// Structural equality of bases, ignoring nullability.
    pub fn same_base(&self, other: &SemType) -> bool {
        match (&self.base, &other.base) {
            (BaseType::Int, BaseType::Int)
            | (BaseType::Bool, BaseType::Bool)
            | (BaseType::Str, BaseType::Str)
            | (BaseType::Null, BaseType::Null)
            | (BaseType::StateSet, BaseType::StateSet) => true,
            (BaseType::List(a), BaseType::List(b)) => a.same_base(b),
            (BaseType::Record(a), BaseType::Record(b)) => a == b,
            _ => false,
        }
    }

    /// May a value of type `self` be stored in a slot of type `dst`?
    pub fn assignable_to(&self, dst: &SemType) -> bool {
        if self.is_null_literal() {
            return dst.nullable;
        }
        self.same_base(dst) && (dst.nullable || !self.nullable)
    }
}

impl core::fmt::Display for SemType {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match &self.base {
            BaseType::Int => write!(f, "int")?,
            BaseType::Bool => write!(f, "bool")?,
            BaseType::Str => write!(f, "string")?,
            BaseType::List(e) => write!(f, "[{}]", e)?,
            BaseType::Record(n) => write!(f, "{}", n)?,
            BaseType::Null => write!(f, "null")?,
            BaseType::StateSet => write!(f, "@")?,
        }
        if self.nullable && self.base != BaseType::Null {
            write!(f, "?")?;
        }
        Ok(())
    }
}
