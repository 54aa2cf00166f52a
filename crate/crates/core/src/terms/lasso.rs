//! Ultimately periodic streams stored as `prefix · period^ω`.

/// An ultimately periodic stream in canonical form: the period is primitive
/// and the prefix is as short as possible, so two lassos are equal iff they
/// denote the same stream.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso<C> {
    prefix: Vec<C>,
    period: Vec<C>,
}

impl<C: Eq + Clone> Lasso<C> {
    /// Canonicalizes `prefix · period^ω`; `None` if the period is empty.
    pub fn new(prefix: Vec<C>, period: Vec<C>) -> Option<Self> {
        if period.is_empty() {
            return None;
        }
        let mut l = Lasso { prefix, period };
        l.canonicalize();
        Some(l)
    }

    /// `c^ω`.
    pub fn constant(c: C) -> Self {
        Lasso {
            prefix: Vec::new(),
            period: vec![c],
        }
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        if let Some(d) =
            (1..n).find(|&d| n % d == 0 && (d..n).all(|i| self.period[i] == self.period[i - d]))
        {
            self.period.truncate(d);
        }
        while let Some(last) = self.prefix.last() {
            if last != self.period.last().expect("period is nonempty") {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn prefix(&self) -> &[C] {
        &self.prefix
    }

    pub fn period(&self) -> &[C] {
        &self.period
    }

    pub fn head(&self) -> &C {
        self.prefix.first().unwrap_or(&self.period[0])
    }

    pub fn tail(&self) -> Self {
        if self.prefix.is_empty() {
            let mut period = self.period.clone();
            period.rotate_left(1);
            Lasso {
                prefix: Vec::new(),
                period,
            }
        } else {
            Lasso {
                prefix: self.prefix[1..].to_vec(),
                period: self.period.clone(),
            }
        }
    }

    /// The stream `c · self`.
    pub fn cons(&self, c: C) -> Self {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(c);
        prefix.extend(self.prefix.iter().cloned());
        let mut l = Lasso {
            prefix,
            period: self.period.clone(),
        };
        l.canonicalize();
        l
    }

    /// Element at stream position `n`.
    pub fn at(&self, n: usize) -> &C {
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// The distinct iterated tails, starting with `self`.
    pub fn suffixes(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity(self.prefix.len() + self.period.len());
        let mut cur = self.clone();
        for _ in 0..self.prefix.len() + self.period.len() {
            let next = cur.tail();
            out.push(cur);
            cur = next;
        }
        out
    }

    /// Prefix followed by one copy of the period.
    pub fn elements(&self) -> impl Iterator<Item = &C> {
        self.prefix.iter().chain(self.period.iter())
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.period.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Applies `f` elementwise and re-canonicalizes.
    pub fn map<D: Eq + Clone>(&self, mut f: impl FnMut(&C) -> D) -> Lasso<D> {
        let mut l = Lasso {
            prefix: self.prefix.iter().map(&mut f).collect(),
            period: self.period.iter().map(&mut f).collect(),
        };
        l.canonicalize();
        l
    }

    /// Rebuilds with the element at position `i` of [`Lasso::elements`] replaced.
    pub fn replace_element(&self, i: usize, c: C) -> Self {
        let mut prefix = self.prefix.clone();
        let mut period = self.period.clone();
        if i < prefix.len() {
            prefix[i] = c;
        } else {
            period[i - prefix.len()] = c;
        }
        let mut l = Lasso { prefix, period };
        l.canonicalize();
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn expand(l: &Lasso<u8>, n: usize) -> Vec<u8> {
        (0..n).map(|i| *l.at(i)).collect()
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn canonical_examples() {
        let l = Lasso::new(vec![1, 2, 2], vec![2, 2]).unwrap();
        assert_eq!(l.prefix(), &[1]);
        assert_eq!(l.period(), &[2]);
        let l = Lasso::new(vec![3, 1], vec![2, 1]).unwrap();
        assert_eq!((l.prefix(), l.period()), (&[3][..], &[1, 2][..]));
        assert!(Lasso::<u8>::new(vec![1], vec![]).is_none());
    }

    #[test]
    fn tail_examples() {
        let l = Lasso::new(vec![0], vec![1]).unwrap();
        assert_eq!(l.tail(), Lasso::new(vec![], vec![1]).unwrap());
        let l = Lasso::new(vec![], vec![1, 2]).unwrap();
        assert_eq!(l.tail(), Lasso::new(vec![], vec![2, 1]).unwrap());
        let l = Lasso::new(vec![5, 6], vec![1, 2, 3]).unwrap();
        let mut seen = l.suffixes();
        let mut cur = l.clone();
        for _ in 0..l.len() {
            cur = cur.tail();
        }
        assert!(seen.contains(&cur));
        seen.dedup();
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn cons_of_period_element_is_absorbed() {
        let l = Lasso::constant(4u8);
        assert_eq!(l.cons(4), l);
        assert_ne!(l.cons(3), l);
    }

    proptest! {
        #[test]
        fn equal_streams_canonicalize_equal(
            p1 in proptest::collection::vec(0u8..3, 0..4),
            q1 in proptest::collection::vec(0u8..3, 1..4),
            p2 in proptest::collection::vec(0u8..3, 0..4),
            q2 in proptest::collection::vec(0u8..3, 1..4),
        ) {
            let a = Lasso::new(p1.clone(), q1.clone()).unwrap();
            let b = Lasso::new(p2.clone(), q2.clone()).unwrap();
            let lcm = q1.len() * q2.len() / gcd(q1.len(), q2.len());
            let n = p1.len() + p2.len() + lcm;
            let raw_a = Lasso { prefix: p1, period: q1 };
            let raw_b = Lasso { prefix: p2, period: q2 };
            let same = expand(&raw_a, n) == expand(&raw_b, n);
            prop_assert_eq!(same, a == b);
            prop_assert_eq!(expand(&a, n), expand(&raw_a, n));
        }

        #[test]
        fn tail_and_cons_agree_with_expansion(
            p in proptest::collection::vec(0u8..3, 0..4),
            q in proptest::collection::vec(0u8..3, 1..4),
            c in 0u8..3,
        ) {
            let l = Lasso::new(p, q).unwrap();
            let n = 12;
            prop_assert_eq!(expand(&l.tail(), n), expand(&l, n + 1)[1..].to_vec());
            let mut consed = vec![c];
            consed.extend(expand(&l, n));
            prop_assert_eq!(expand(&l.cons(c), n + 1), consed);
            prop_assert_eq!(l.cons(*l.head()).tail().cons(*l.head()), l.cons(*l.head()));
            prop_assert_eq!(Lasso::new(l.prefix().to_vec(), l.period().to_vec()).unwrap(), l.clone());
            prop_assert!(l.suffixes().len() <= l.len());
        }
    }
}
