//! The catalog ordering: j-invariant data first (field, then t-field, then
//! the leading coefficient of j's minimal polynomial), then the branching
//! fractions, then the covering degree. Integers compare by radical first,
//! then absolute value; quadratic fields real-before-imaginary by |a|;
//! higher-degree fields by (polynomial) discriminant.

use num::{BigInt, Signed, Zero};

use crate::algebra::rat::{radical, squarefree_kernel, Rat};
use crate::lift::CatalogEntry;
use crate::QPoly;

/// Total order for integers: radical first, then absolute value, then sign.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntKey {
    radical: BigInt,
    abs: BigInt,
    negative: bool,
}

pub fn int_key(n: &BigInt) -> IntKey {
    IntKey {
        radical: radical(n),
        abs: n.abs(),
        negative: n.is_negative(),
    }
}

/// Field ordering key: degree, then (for quadratics) real-before-imaginary
/// and |a| of ℚ(√a), then the discriminant of the recorded polynomial under
/// the integer order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FieldKey {
    degree: usize,
    quad_imaginary: bool,
    quad_abs: BigInt,
    disc: IntKey,
}

pub fn field_key_from_minpoly(minpoly: &[BigInt]) -> FieldKey {
    let degree = minpoly.len().saturating_sub(1).max(1);
    let poly = QPoly::from_coeffs(
        minpoly
            .iter()
            .map(|c| Rat::from_bigs(c.clone(), BigInt::from(1)))
            .collect(),
    );
    let disc = poly
        .discriminant()
        .map(|d| {
            let scaled = d.numer() * d.denom();
            int_key(&scaled)
        })
        .unwrap_or_else(|_| int_key(&BigInt::zero()));
    if degree == 2 {
        // ℚ(√a) with a = squarefree kernel of the discriminant.
        let a = poly
            .discriminant()
            .map(|d| squarefree_kernel(&(d.numer() * d.denom())))
            .unwrap_or_else(|_| BigInt::zero());
        FieldKey {
            degree,
            quad_imaginary: a.is_negative(),
            quad_abs: a.abs(),
            disc,
        }
    } else {
        FieldKey {
            degree,
            quad_imaginary: false,
            quad_abs: BigInt::zero(),
            disc,
        }
    }
}

/// Lexicographic catalog key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SortKey {
    /// (a1) the j-field.
    pub j_field: FieldKey,
    /// (a2) the t-field (degree marker + quadratic kernel when known).
    pub t_field: FieldKey,
    /// (a3) leading coefficient of j's minimal polynomial over ℤ
    /// (the denominator of j when j ∈ ℚ), in the integer order.
    pub j_lead: IntKey,
    /// Secondary tie-break inside rational j: the j-numerator.
    pub j_num: IntKey,
    /// (b) fraction tuple, elementwise (denominator, numerator).
    pub fractions: Vec<(u32, u32)>,
    /// (c) degree.
    pub degree: u32,
}

pub fn sort_key(entry: &CatalogEntry) -> SortKey {
    let rational_field_key = FieldKey {
        degree: 1,
        quad_imaginary: false,
        quad_abs: BigInt::zero(),
        disc: int_key(&BigInt::from(1)),
    };
    let (j_field, j_lead, j_num) = match &entry.invariants.j_rational {
        Some((n, d)) => {
            let den: BigInt = d.parse().unwrap_or_else(|_| BigInt::from(1));
            let num: BigInt = n.parse().unwrap_or_else(|_| BigInt::zero());
            (rational_field_key.clone(), int_key(&den), int_key(&num))
        }
        None => (
            field_key_from_minpoly(&entry.field.minpoly),
            int_key(&entry.field.minpoly.last().cloned().unwrap_or_else(|| BigInt::from(1))),
            int_key(&BigInt::zero()),
        ),
    };
    let t_field = if entry.invariants.t_values.is_some() {
        rational_field_key
    } else if let Some(mp) = &entry.invariants.t_minpoly {
        let coeffs: Vec<BigInt> = mp
            .iter()
            .map(|s| {
                // minimal polynomials serialize rational coefficients; use
                // the numerator of each for the key (monic integer case is
                // the common one).
                s.split('/')
                    .next()
                    .and_then(|x| x.parse().ok())
                    .unwrap_or_else(BigInt::zero)
            })
            .collect();
        field_key_from_minpoly(&coeffs)
    } else {
        FieldKey {
            degree: usize::MAX,
            quad_imaginary: false,
            quad_abs: BigInt::zero(),
            disc: int_key(&BigInt::zero()),
        }
    };
    SortKey {
        j_field,
        t_field,
        j_lead,
        j_num,
        fractions: entry.pattern.fractions.iter().map(|f| (f.order, f.numerator)).collect(),
        degree: entry.pattern.degree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_order_radical_first() {
        // 8 precedes 6: radical 2 < radical 6.
        assert!(int_key(&BigInt::from(8)) < int_key(&BigInt::from(6)));
        // Within equal radical, absolute value decides.
        assert!(int_key(&BigInt::from(2)) < int_key(&BigInt::from(8)));
    }

    #[test]
    fn field_order_real_before_imaginary() {
        // ℚ(√2) before ℚ(√−1).
        let sqrt2 = field_key_from_minpoly(&[BigInt::from(-2), BigInt::zero(), BigInt::from(1)]);
        let i = field_key_from_minpoly(&[BigInt::from(1), BigInt::zero(), BigInt::from(1)]);
        assert!(sqrt2 < i);
        // Degree dominates: ℚ before any quadratic field.
        let q = field_key_from_minpoly(&[BigInt::zero(), BigInt::from(1)]);
        assert!(q < sqrt2);
    }

    #[test]
    fn fraction_tuple_order() {
        // (b1): by denominator, then numerator.
        let a = vec![(3u32, 1u32), (3, 2), (9, 1), (9, 2)];
        let b = vec![(3u32, 1u32), (3, 2), (9, 2), (9, 2)];
        assert!(a < b);
    }
}
