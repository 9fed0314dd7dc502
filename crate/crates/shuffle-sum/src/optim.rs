//! Golden-section line search used by the recursive-protocol parameter
//! optimizer.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` over `[lo, hi]` by golden-section search, assuming `f` is
/// unimodal there. Infinite objective values act as a barrier. Returns the
/// best probe point and its value.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    iterations: usize,
) -> (f64, f64) {
    debug_assert!(lo <= hi);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    // Track the best point seen so the result never regresses when f is not
    // exactly unimodal.
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
        let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}
