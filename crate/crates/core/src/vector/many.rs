use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::{
    check_array, check_len, fallback, Capabilities, NVector, Result, VectorError, VectorKind,
};

/// Counts global reduction combines performed by a family of many-vectors.
///
/// Clones of a [`ManyVector`] share the counter of their source, so a single
/// counter observes every reduction issued against a state vector and all the
/// workspace vectors cloned from it.
#[derive(Debug, Clone, Default)]
pub struct ReductionCounter(Arc<AtomicUsize>);

impl ReductionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }

    pub fn add(&self, n: usize) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }
}

/// Composite vector over an ordered list of subvectors.
///
/// Element-wise kernels are delegated to the subvectors. Reductions gather a
/// local value from each subvector and then perform one global combine, which
/// is recorded in the [`ReductionCounter`].
#[derive(Debug, Clone)]
pub struct ManyVector<V: NVector> {
    subs: Vec<V>,
    len: usize,
    caps: Capabilities,
    counter: ReductionCounter,
}

impl<V: NVector> ManyVector<V> {
    pub fn new(subs: Vec<V>) -> Result<Self> {
        if subs.is_empty() {
            return Err(VectorError::Empty);
        }
        let len = subs.iter().map(NVector::len).sum();
        Ok(ManyVector {
            subs,
            len,
            caps: Capabilities::ALL,
            counter: ReductionCounter::new(),
        })
    }

    pub fn num_subvectors(&self) -> usize {
        self.subs.len()
    }

    pub fn subvector_lengths(&self) -> Vec<usize> {
        self.subs.iter().map(NVector::len).collect()
    }

    pub fn get_subvector(&self, j: usize) -> Result<&V> {
        let len = self.subs.len();
        self.subs
            .get(j)
            .ok_or(VectorError::IndexOutOfRange { index: j, len })
    }

    pub fn subvector_mut(&mut self, j: usize) -> Result<&mut V> {
        let len = self.subs.len();
        self.subs
            .get_mut(j)
            .ok_or(VectorError::IndexOutOfRange { index: j, len })
    }

    pub fn subvectors(&self) -> &[V] {
        &self.subs
    }

    pub fn subvectors_mut(&mut self) -> &mut [V] {
        &mut self.subs
    }

    pub fn into_subvectors(self) -> Vec<V> {
        self.subs
    }

    pub fn reduction_counter(&self) -> &ReductionCounter {
        &self.counter
    }

    /// Replaces the reduction counter; clones made afterwards share it.
    pub fn set_reduction_counter(&mut self, counter: ReductionCounter) {
        self.counter = counter;
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.subs.len() != other.subs.len() {
            return Err(VectorError::PartitionMismatch {
                expected: self.subs.len(),
                found: other.subs.len(),
            });
        }
        check_len(self.len, other.len)
    }

    fn combine(&self) {
        self.counter.add(1);
    }
}

impl<V: NVector> NVector for ManyVector<V> {
    fn kind(&self) -> VectorKind {
        VectorKind::Many
    }

    fn len(&self) -> usize {
        self.len
    }

    fn capabilities(&self) -> Capabilities {
        self.caps
    }

    /// Sets the capabilities of the composite and of every subvector.
    fn set_capabilities(&mut self, caps: Capabilities) {
        self.caps = caps;
        for s in &mut self.subs {
            s.set_capabilities(caps);
        }
    }

    fn copy_to_slice(&self, out: &mut [f64]) -> Result<()> {
        check_len(self.len, out.len())?;
        let mut off = 0;
        for s in &self.subs {
            s.copy_to_slice(&mut out[off..off + s.len()])?;
            off += s.len();
        }
        Ok(())
    }

    fn copy_from_slice(&mut self, src: &[f64]) -> Result<()> {
        check_len(self.len, src.len())?;
        let mut off = 0;
        for s in &mut self.subs {
            let n = s.len();
            s.copy_from_slice(&src[off..off + n])?;
            off += n;
        }
        Ok(())
    }

    fn linear_sum(&mut self, a: f64, x: &Self, b: f64, y: &Self) -> Result<()> {
        self.check(x)?;
        self.check(y)?;
        for ((z, x), y) in self.subs.iter_mut().zip(&x.subs).zip(&y.subs) {
            z.linear_sum(a, x, b, y)?;
        }
        Ok(())
    }

    fn axpby(&mut self, a: f64, b: f64, y: &Self) -> Result<()> {
        self.check(y)?;
        for (z, y) in self.subs.iter_mut().zip(&y.subs) {
            z.axpby(a, b, y)?;
        }
        Ok(())
    }

    fn const_fill(&mut self, c: f64) {
        self.subs.iter_mut().for_each(|s| s.const_fill(c));
    }

    fn scale(&mut self, c: f64, x: &Self) -> Result<()> {
        self.check(x)?;
        for (z, x) in self.subs.iter_mut().zip(&x.subs) {
            z.scale(c, x)?;
        }
        Ok(())
    }

    fn scale_in_place(&mut self, c: f64) {
        self.subs.iter_mut().for_each(|s| s.scale_in_place(c));
    }

    fn prod(&mut self, x: &Self, y: &Self) -> Result<()> {
        self.check(x)?;
        self.check(y)?;
        for ((z, x), y) in self.subs.iter_mut().zip(&x.subs).zip(&y.subs) {
            z.prod(x, y)?;
        }
        Ok(())
    }

    fn div(&mut self, x: &Self, y: &Self) -> Result<()> {
        self.check(x)?;
        self.check(y)?;
        let mut off = 0;
        for ((z, x), y) in self.subs.iter_mut().zip(&x.subs).zip(&y.subs) {
            z.div(x, y).map_err(|e| offset_index(e, off))?;
            off += x.len();
        }
        Ok(())
    }

    fn abs(&mut self, x: &Self) -> Result<()> {
        self.check(x)?;
        for (z, x) in self.subs.iter_mut().zip(&x.subs) {
            z.abs(x)?;
        }
        Ok(())
    }

    fn inv(&mut self, x: &Self) -> Result<()> {
        self.check(x)?;
        let mut off = 0;
        for (z, x) in self.subs.iter_mut().zip(&x.subs) {
            z.inv(x).map_err(|e| offset_index(e, off))?;
            off += x.len();
        }
        Ok(())
    }

    fn add_const(&mut self, x: &Self, c: f64) -> Result<()> {
        self.check(x)?;
        for (z, x) in self.subs.iter_mut().zip(&x.subs) {
            z.add_const(x, c)?;
        }
        Ok(())
    }

    fn dot(&self, y: &Self) -> Result<f64> {
        self.check(y)?;
        let mut sum = 0.0;
        for (x, y) in self.subs.iter().zip(&y.subs) {
            sum += x.dot(y)?;
        }
        self.combine();
        Ok(sum)
    }

    fn max_norm(&self) -> f64 {
        let m = self.subs.iter().fold(0.0, |m, s| s.max_norm().max(m));
        self.combine();
        m
    }

    fn min(&self) -> f64 {
        let m = self.subs.iter().fold(f64::INFINITY, |m, s| s.min().min(m));
        self.combine();
        m
    }

    fn wrms_norm(&self, w: &Self) -> Result<f64> {
        self.check(w)?;
        let mut local = 0.0;
        for (x, w) in self.subs.iter().zip(&w.subs) {
            local += match x.local_squared_sum(w) {
                Some(sum) => sum?,
                None => {
                    // the subvector's own norm is a reduction of its own
                    self.counter.add(1);
                    fallback::squared_sum_from_wrms(x, w)?
                }
            };
        }
        self.combine();
        Ok((local / self.len as f64).sqrt())
    }

    fn local_squared_sum(&self, w: &Self) -> Option<Result<f64>> {
        if !self.caps.local_reductions {
            return None;
        }
        let sum = || -> Result<f64> {
            self.check(w)?;
            let mut local = 0.0;
            for (x, w) in self.subs.iter().zip(&w.subs) {
                local += match x.local_squared_sum(w) {
                    Some(sum) => sum?,
                    None => fallback::squared_sum_from_wrms(x, w)?,
                };
            }
            Ok(local)
        };
        Some(sum())
    }

    fn linear_combination(&mut self, c: &[f64], xs: &[&Self]) -> Result<()> {
        if !self.caps.fused {
            return fallback::linear_combination(self, c, xs);
        }
        check_array("coefficients", xs.len(), c.len())?;
        for x in xs {
            self.check(x)?;
        }
        for (j, z) in self.subs.iter_mut().enumerate() {
            let sub_xs: Vec<&V> = xs.iter().map(|x| &x.subs[j]).collect();
            z.linear_combination(c, &sub_xs)?;
        }
        Ok(())
    }

    fn scale_add_multi(a: &[f64], x: &Self, ys: &[&Self], zs: &mut [&mut Self]) -> Result<()> {
        if !x.caps.fused {
            return fallback::scale_add_multi(a, x, ys, zs);
        }
        check_array("coefficients", ys.len(), a.len())?;
        check_array("outputs", ys.len(), zs.len())?;
        for (y, z) in ys.iter().zip(zs.iter()) {
            x.check(y)?;
            x.check(z)?;
        }
        for (j, xj) in x.subs.iter().enumerate() {
            let sub_ys: Vec<&V> = ys.iter().map(|y| &y.subs[j]).collect();
            let mut sub_zs: Vec<&mut V> = zs.iter_mut().map(|z| &mut z.subs[j]).collect();
            V::scale_add_multi(a, xj, &sub_ys, &mut sub_zs)?;
        }
        Ok(())
    }

    fn dot_prod_multi(&self, ys: &[&Self], out: &mut [f64]) -> Result<()> {
        if !self.caps.fused {
            return fallback::dot_prod_multi(self, ys, out);
        }
        check_array("outputs", ys.len(), out.len())?;
        for y in ys {
            self.check(y)?;
        }
        out.fill(0.0);
        let mut partial = vec![0.0; ys.len()];
        for (j, xj) in self.subs.iter().enumerate() {
            let sub_ys: Vec<&V> = ys.iter().map(|y| &y.subs[j]).collect();
            xj.dot_prod_multi(&sub_ys, &mut partial)?;
            for (o, p) in out.iter_mut().zip(&partial) {
                *o += p;
            }
        }
        self.combine();
        Ok(())
    }

    fn linear_sum_vector_array(
        a: f64,
        xs: &[&Self],
        b: f64,
        ys: &[&Self],
        zs: &mut [&mut Self],
    ) -> Result<()> {
        let native = xs.first().map(|x| x.caps.vector_array).unwrap_or(false);
        if !native {
            return fallback::linear_sum_vector_array(a, xs, b, ys, zs);
        }
        check_array("second operands", xs.len(), ys.len())?;
        check_array("outputs", xs.len(), zs.len())?;
        for ((x, y), z) in xs.iter().zip(ys).zip(zs.iter()) {
            x.check(y)?;
            x.check(z)?;
        }
        for j in 0..xs[0].subs.len() {
            let sub_xs: Vec<&V> = xs.iter().map(|x| &x.subs[j]).collect();
            let sub_ys: Vec<&V> = ys.iter().map(|y| &y.subs[j]).collect();
            let mut sub_zs: Vec<&mut V> = zs.iter_mut().map(|z| &mut z.subs[j]).collect();
            V::linear_sum_vector_array(a, &sub_xs, b, &sub_ys, &mut sub_zs)?;
        }
        Ok(())
    }
}

fn offset_index(e: VectorError, off: usize) -> VectorError {
    match e {
        VectorError::DivisionByZero { index } => VectorError::DivisionByZero { index: index + off },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::SerialVector;

    fn s(x: &[f64]) -> SerialVector {
        SerialVector::from_slice(x).unwrap()
    }

    fn mv(parts: &[&[f64]]) -> ManyVector<SerialVector> {
        ManyVector::new(parts.iter().map(|p| s(p)).collect()).unwrap()
    }

    #[test]
    fn lengths_and_subvectors() {
        let m = mv(&[&[1.0, 2.0], &[3.0, 4.0, 5.0]]);
        assert_eq!(m.len(), 5);
        assert_eq!(m.get_subvector(0).unwrap().len(), 2);
        assert_eq!(m.subvector_lengths(), vec![2, 3]);
        assert!(matches!(
            m.get_subvector(2),
            Err(VectorError::IndexOutOfRange { index: 2, len: 2 })
        ));
        let c = m.clone();
        assert_eq!(c.subvector_lengths(), vec![2, 3]);
        assert_eq!(c.kind(), VectorKind::Many);
    }

    #[test]
    fn wrms_matches_flat() {
        let x = mv(&[&[1.0], &[2.0]]);
        let w = mv(&[&[1.0], &[0.5]]);
        assert_eq!(x.wrms_norm(&w).unwrap(), 1.0);
    }

    #[test]
    fn wrms_fallback_branch_counts_subvector_reductions() {
        let mut x = mv(&[&[1.0], &[2.0], &[3.0]]);
        let w = mv(&[&[1.0], &[0.5], &[1.0]]);
        x.reduction_counter().reset();
        let with_kernel = x.wrms_norm(&w).unwrap();
        assert_eq!(x.reduction_counter().get(), 1);

        x.subvector_mut(1)
            .unwrap()
            .set_capabilities(Capabilities::NONE);
        x.reduction_counter().reset();
        let mixed = x.wrms_norm(&w).unwrap();
        assert_eq!(x.reduction_counter().get(), 2);
        assert!((with_kernel - mixed).abs() <= 1e-14 * with_kernel);
    }

    #[test]
    fn clones_share_counter() {
        let x = mv(&[&[1.0], &[2.0]]);
        let y = x.clone();
        x.reduction_counter().reset();
        let _ = y.dot(&x).unwrap();
        assert_eq!(x.reduction_counter().get(), 1);
    }

    #[test]
    fn partition_mismatch() {
        let mut z = mv(&[&[0.0, 0.0], &[0.0]]);
        let x = mv(&[&[1.0], &[2.0], &[3.0]]);
        assert!(matches!(
            z.scale(1.0, &x),
            Err(VectorError::PartitionMismatch { .. })
        ));
    }

    #[test]
    fn division_error_reports_global_index() {
        let mut z = mv(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let x = mv(&[&[1.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(z.inv(&x), Err(VectorError::DivisionByZero { index: 3 }));
    }

    #[test]
    fn element_copy_roundtrip() {
        let mut m = mv(&[&[0.0, 0.0], &[0.0]]);
        m.copy_from_slice(&[1.0, 2.0, 3.0]).unwrap();
        let mut out = [0.0; 3];
        m.copy_to_slice(&mut out).unwrap();
        assert_eq!(out, [1.0, 2.0, 3.0]);
        assert_eq!(m.get_subvector(1).unwrap().as_slice(), &[3.0]);
    }
}
