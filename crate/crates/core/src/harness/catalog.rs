use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::diff::QFunction;
use crate::functions;
use crate::quaternion::Quaternion;
use crate::sampling;
use crate::series::{PowerSeries, SliceComponents, SliceDecomposition, DEFAULT_ORDER};
use crate::slice::UnitImaginary;

/// Seed for the random coefficients of the builtin catalog.
pub const CATALOG_SEED: u64 = 0x5eed_cafe;

/// Declared radius of the builtin exponential series.
pub const EXP_RADIUS: f64 = 8.0;

/// What a run over an entry must show.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expectation {
    /// Every checked row passes.
    SDerivable,
    /// At least one row fails.
    NotSDerivable,
    /// Rows at non-real points with `ι = ±axis` pass; some other row fails.
    SliceOnly(UnitImaginary),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::SDerivable => f.write_str("s_derivable"),
            Expectation::NotSDerivable => f.write_str("not_s_derivable"),
            Expectation::SliceOnly(u) => write!(f, "slice_only({})", u.axis()),
        }
    }
}

impl Serialize for Expectation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub type SharedComponents = Arc<dyn SliceDecomposition + Send + Sync>;

/// A function under test together with what the checks should find.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub function: QFunction,
    pub expectation: Expectation,
    pub notes: String,
    /// Slice components, when known, enable the slice-criterion check.
    pub components: Option<SharedComponents>,
    pub series: Option<PowerSeries>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("expectation", &self.expectation)
            .field("notes", &self.notes)
            .field("components", &self.components.is_some())
            .finish()
    }
}

impl CatalogEntry {
    pub fn new(
        name: impl Into<String>,
        function: QFunction,
        expectation: Expectation,
        notes: impl Into<String>,
    ) -> Self {
        CatalogEntry { name: name.into(), function, expectation, notes: notes.into(), components: None, series: None }
    }

    pub fn with_components(mut self, c: SharedComponents) -> Self {
        self.components = Some(c);
        self
    }

    /// Entry for a power series; the series doubles as its slice components.
    pub fn from_series(
        name: impl Into<String>,
        series: PowerSeries,
        expectation: Expectation,
        notes: impl Into<String>,
    ) -> Self {
        let name = name.into();
        let function = series.to_qfunction(name.clone());
        let mut e = CatalogEntry::new(name, function, expectation, notes).with_components(Arc::new(series.clone()));
        e.series = Some(series);
        e
    }
}

fn monomial(n: usize, radius: f64) -> PowerSeries {
    let mut c = vec![Quaternion::ZERO; n + 1];
    c[n] = Quaternion::ONE;
    PowerSeries::new(c, radius).expect("non-empty coefficients, positive radius")
}

/// The builtin functions: powers `q^0..q^8`, `ι`, a truncated exponential, an
/// affine map `q a + b`, and the negatives `conj`, `i q`, `a q`.
pub fn builtin_catalog() -> Vec<CatalogEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(CATALOG_SEED);
    let mut out = Vec::new();
    for n in 0..=8u32 {
        out.push(
            CatalogEntry::new(format!("pow{n}"), functions::power(n), Expectation::SDerivable, format!("q^{n}"))
                .with_components(Arc::new(monomial(n as usize, f64::INFINITY))),
        );
    }
    out.push(
        CatalogEntry::new("iota", functions::iota(), Expectation::SDerivable, "imaginary direction; u = 0, v = 1")
            .with_components(Arc::new(SliceComponents::new(|_, _| Quaternion::ZERO, |_, _| Quaternion::ONE))),
    );
    let exp = PowerSeries::exponential(DEFAULT_ORDER, EXP_RADIUS).expect("valid exponential series");
    out.push(CatalogEntry::from_series(
        "exp_series",
        exp,
        Expectation::SDerivable,
        format!("sum q^k / k!, N = {DEFAULT_ORDER}, R = {EXP_RADIUS}"),
    ));

    let a = sampling::gaussian(&mut rng);
    let b = sampling::gaussian(&mut rng);
    let affine = PowerSeries::new(vec![b, a], f64::INFINITY).expect("valid affine series");
    out.push(
        CatalogEntry::new(
            "affine",
            functions::affine(a, b),
            Expectation::SDerivable,
            format!("q a + b, a = {a}, b = {b}"),
        )
        .with_components(Arc::new(affine)),
    );

    out.push(CatalogEntry::new("conj", functions::conjugate(), Expectation::NotSDerivable, "conj(q)"));
    out.push(CatalogEntry::new(
        "left_i",
        functions::left_mul(Quaternion::I),
        Expectation::SliceOnly(UnitImaginary::I),
        "i q; regular only on the slice R + iR",
    ));
    let c = loop {
        let c = sampling::gaussian(&mut rng);
        if c.vector_norm() > 0.1 {
            break c;
        }
    };
    out.push(CatalogEntry::new("left_a", functions::left_mul(c), Expectation::NotSDerivable, format!("a q, a = {c}")));
    out
}
