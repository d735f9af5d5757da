use super::{
    check_array, check_len, fallback, Capabilities, NVector, Result, VectorError, VectorKind,
};

/// Contiguous vector of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SerialVector {
    data: Vec<f64>,
    caps: Capabilities,
}

impl SerialVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(VectorError::Empty);
        }
        Ok(SerialVector {
            data,
            caps: Capabilities::ALL,
        })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn with_capabilities(mut self, caps: Capabilities) -> Self {
        self.caps = caps;
        self
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        self.data
            .get(i)
            .copied()
            .ok_or(VectorError::IndexOutOfRange {
                index: i,
                len: self.data.len(),
            })
    }

    pub fn set(&mut self, i: usize, value: f64) -> Result<()> {
        let len = self.data.len();
        let slot = self
            .data
            .get_mut(i)
            .ok_or(VectorError::IndexOutOfRange { index: i, len })?;
        *slot = value;
        Ok(())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    fn check(&self, other: &Self) -> Result<()> {
        check_len(self.data.len(), other.data.len())
    }

    fn zip_map(&mut self, x: &Self, y: &Self, f: impl Fn(f64, f64) -> f64) -> Result<()> {
        self.check(x)?;
        self.check(y)?;
        for ((z, &xi), &yi) in self.data.iter_mut().zip(&x.data).zip(&y.data) {
            *z = f(xi, yi);
        }
        Ok(())
    }

    fn map(&mut self, x: &Self, f: impl Fn(f64) -> f64) -> Result<()> {
        self.check(x)?;
        for (z, &xi) in self.data.iter_mut().zip(&x.data) {
            *z = f(xi);
        }
        Ok(())
    }
}

impl NVector for SerialVector {
    fn kind(&self) -> VectorKind {
        VectorKind::Serial
    }

    fn len(&self) -> usize {
        self.data.len()
    }

    fn capabilities(&self) -> Capabilities {
        self.caps
    }

    fn set_capabilities(&mut self, caps: Capabilities) {
        self.caps = caps;
    }

    fn copy_to_slice(&self, out: &mut [f64]) -> Result<()> {
        check_len(self.data.len(), out.len())?;
        out.copy_from_slice(&self.data);
        Ok(())
    }

    fn copy_from_slice(&mut self, src: &[f64]) -> Result<()> {
        check_len(self.data.len(), src.len())?;
        self.data.copy_from_slice(src);
        Ok(())
    }

    fn linear_sum(&mut self, a: f64, x: &Self, b: f64, y: &Self) -> Result<()> {
        self.zip_map(x, y, |xi, yi| a * xi + b * yi)
    }

    fn axpby(&mut self, a: f64, b: f64, y: &Self) -> Result<()> {
        self.check(y)?;
        for (z, &yi) in self.data.iter_mut().zip(&y.data) {
            *z = a * *z + b * yi;
        }
        Ok(())
    }

    fn const_fill(&mut self, c: f64) {
        self.data.fill(c);
    }

    fn scale(&mut self, c: f64, x: &Self) -> Result<()> {
        self.map(x, |xi| c * xi)
    }

    fn scale_in_place(&mut self, c: f64) {
        self.data.iter_mut().for_each(|z| *z *= c);
    }

    fn prod(&mut self, x: &Self, y: &Self) -> Result<()> {
        self.zip_map(x, y, |xi, yi| xi * yi)
    }

    fn div(&mut self, x: &Self, y: &Self) -> Result<()> {
        if let Some(index) = y.data.iter().position(|&v| v == 0.0) {
            return Err(VectorError::DivisionByZero { index });
        }
        self.zip_map(x, y, |xi, yi| xi / yi)
    }

    fn abs(&mut self, x: &Self) -> Result<()> {
        self.map(x, f64::abs)
    }

    fn inv(&mut self, x: &Self) -> Result<()> {
        if let Some(index) = x.data.iter().position(|&v| v == 0.0) {
            return Err(VectorError::DivisionByZero { index });
        }
        self.map(x, |xi| 1.0 / xi)
    }

    fn add_const(&mut self, x: &Self, c: f64) -> Result<()> {
        self.map(x, |xi| xi + c)
    }

    fn dot(&self, y: &Self) -> Result<f64> {
        self.check(y)?;
        Ok(self
            .data
            .iter()
            .zip(&y.data)
            .fold(0.0, |acc, (a, b)| acc + a * b))
    }

    fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn wrms_norm(&self, w: &Self) -> Result<f64> {
        self.check(w)?;
        let sum: f64 = self
            .data
            .iter()
            .zip(&w.data)
            .map(|(x, w)| (x * w) * (x * w))
            .sum();
        Ok((sum / self.data.len() as f64).sqrt())
    }

    fn local_squared_sum(&self, w: &Self) -> Option<Result<f64>> {
        if !self.caps.local_reductions {
            return None;
        }
        Some(self.check(w).map(|_| {
            self.data
                .iter()
                .zip(&w.data)
                .map(|(x, w)| (x * w) * (x * w))
                .sum()
        }))
    }

    fn linear_combination(&mut self, c: &[f64], xs: &[&Self]) -> Result<()> {
        if !self.caps.fused {
            return fallback::linear_combination(self, c, xs);
        }
        check_array("coefficients", xs.len(), c.len())?;
        for x in xs {
            self.check(x)?;
        }
        for (j, z) in self.data.iter_mut().enumerate() {
            let mut acc = c[0] * xs[0].data[j];
            for (ci, xi) in c.iter().zip(xs).skip(1) {
                acc += ci * xi.data[j];
            }
            *z = acc;
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
        for ((ai, yi), zi) in a.iter().zip(ys).zip(zs.iter_mut()) {
            for ((z, &xj), &yj) in zi.data.iter_mut().zip(&x.data).zip(&yi.data) {
                *z = ai * xj + yj;
            }
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
        // one pass over x, accumulating every product in element order
        for (j, &xj) in self.data.iter().enumerate() {
            for (d, y) in out.iter_mut().zip(ys) {
                *d += xj * y.data[j];
            }
        }
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
        for ((x, y), z) in xs.iter().zip(ys).zip(zs.iter_mut()) {
            for ((zj, &xj), &yj) in z.data.iter_mut().zip(&x.data).zip(&y.data) {
                *zj = a * xj + b * yj;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> SerialVector {
        SerialVector::from_slice(x).unwrap()
    }

    #[test]
    fn linear_sum_examples() {
        let mut z = v(&[0.0, 0.0]);
        z.linear_sum(1.0, &v(&[1.0, 2.0]), 0.0, &v(&[9.0, 9.0]))
            .unwrap();
        assert_eq!(z.as_slice(), &[1.0, 2.0]);
        z.linear_sum(1.0, &v(&[1.0, 2.0]), 1.0, &v(&[3.0, 4.0]))
            .unwrap();
        assert_eq!(z.as_slice(), &[4.0, 6.0]);
        let mut z = v(&[0.0; 3]);
        z.linear_sum(2.0, &v(&[1.0, 1.0, 1.0]), -1.0, &v(&[1.0, 2.0, 3.0]))
            .unwrap();
        assert_eq!(z.as_slice(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn core_kernels() {
        assert_eq!(v(&[1.0, 2.0, 3.0]).dot(&v(&[1.0, 1.0, 1.0])).unwrap(), 6.0);
        assert_eq!(v(&[-3.0, 2.0]).max_norm(), 3.0);
        assert_eq!(v(&[-3.0, 2.0]).min(), -3.0);
        let mut z = v(&[0.0, 0.0]);
        z.inv(&v(&[2.0, 4.0])).unwrap();
        assert_eq!(z.as_slice(), &[0.5, 0.25]);
        z.abs(&v(&[-1.5, 2.0])).unwrap();
        assert_eq!(z.as_slice(), &[1.5, 2.0]);
        z.add_const(&v(&[1.0, 2.0]), 0.5).unwrap();
        assert_eq!(z.as_slice(), &[1.5, 2.5]);
        z.prod(&v(&[2.0, 3.0]), &v(&[4.0, 5.0])).unwrap();
        assert_eq!(z.as_slice(), &[8.0, 15.0]);
        z.div(&v(&[2.0, 3.0]), &v(&[4.0, 6.0])).unwrap();
        assert_eq!(z.as_slice(), &[0.5, 0.5]);
        z.const_fill(7.0);
        assert_eq!(z.as_slice(), &[7.0, 7.0]);
        z.scale(3.0, &v(&[1.0, -1.0])).unwrap();
        assert_eq!(z.as_slice(), &[3.0, -3.0]);
    }

    #[test]
    fn division_by_zero_is_reported() {
        let mut z = v(&[0.0, 0.0]);
        assert_eq!(
            z.inv(&v(&[1.0, 0.0])),
            Err(VectorError::DivisionByZero { index: 1 })
        );
        assert_eq!(
            z.div(&v(&[1.0, 1.0]), &v(&[0.0, 1.0])),
            Err(VectorError::DivisionByZero { index: 0 })
        );
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut z = v(&[0.0, 0.0]);
        assert!(matches!(
            z.linear_sum(1.0, &v(&[1.0]), 1.0, &v(&[1.0, 2.0])),
            Err(VectorError::ShapeMismatch { .. })
        ));
        assert!(v(&[1.0]).dot(&v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn wrms_and_local_sum() {
        let x = v(&[1.0, 2.0]);
        let w = v(&[1.0, 0.5]);
        assert_eq!(x.wrms_norm(&w).unwrap(), 1.0);
        assert_eq!(x.local_squared_sum(&w).unwrap().unwrap(), 2.0);
        assert_eq!(v(&[0.0, 0.0]).wrms_norm(&w).unwrap(), 0.0);
        let plain = x.clone().with_capabilities(Capabilities::NONE);
        assert!(plain.local_squared_sum(&w).is_none());
    }

    #[test]
    fn fused_small_examples() {
        let mut z = v(&[0.0, 0.0]);
        z.linear_combination(&[2.0], &[&v(&[1.0, 1.0])]).unwrap();
        assert_eq!(z.as_slice(), &[2.0, 2.0]);

        let e = [
            v(&[1.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0]),
            v(&[0.0, 0.0, 1.0]),
        ];
        let mut z = v(&[0.0; 3]);
        z.linear_combination(&[1.0; 3], &[&e[0], &e[1], &e[2]])
            .unwrap();
        assert_eq!(z.as_slice(), &[1.0, 1.0, 1.0]);

        let x = v(&[1.0, 1.0]);
        let y0 = v(&[0.0, 0.0]);
        let y1 = v(&[2.0, 2.0]);
        let mut z0 = v(&[9.0, 9.0]);
        let mut z1 = v(&[9.0, 9.0]);
        SerialVector::scale_add_multi(&[1.0, -1.0], &x, &[&y0, &y1], &mut [&mut z0, &mut z1])
            .unwrap();
        assert_eq!(z0.as_slice(), &[1.0, 1.0]);
        assert_eq!(z1.as_slice(), &[1.0, 1.0]);

        let mut d = [0.0; 2];
        x.dot_prod_multi(&[&v(&[1.0, 0.0]), &v(&[0.0, 2.0])], &mut d)
            .unwrap();
        assert_eq!(d, [1.0, 2.0]);

        let mut z0 = v(&[0.0, 0.0]);
        let mut z1 = v(&[0.0, 0.0]);
        SerialVector::linear_sum_vector_array(
            1.0,
            &[&x, &y1],
            1.0,
            &[&x, &y1],
            &mut [&mut z0, &mut z1],
        )
        .unwrap();
        assert_eq!(z0.as_slice(), &[2.0, 2.0]);
        assert_eq!(z1.as_slice(), &[4.0, 4.0]);
    }

    #[test]
    fn empty_arrays_are_rejected() {
        let mut z = v(&[0.0]);
        assert_eq!(z.linear_combination(&[], &[]), Err(VectorError::EmptyArray));
        let mut d: [f64; 0] = [];
        assert_eq!(z.dot_prod_multi(&[], &mut d), Err(VectorError::EmptyArray));
        assert!(SerialVector::new(vec![]).is_err());
    }

    #[test]
    fn clone_keeps_capabilities() {
        let a = v(&[1.0, 2.0, 3.0, 4.0]).with_capabilities(Capabilities {
            fused: false,
            vector_array: true,
            local_reductions: false,
        });
        let b = a.clone();
        assert_eq!(b.len(), 4);
        assert_eq!(b.kind(), VectorKind::Serial);
        assert_eq!(b.capabilities(), a.capabilities());
    }
}
