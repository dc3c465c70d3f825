//! Prints the corpus-average MSE of the three methods on the bundled demo corpus.

use dlsr_core::corpus::{test_corpus, training_corpus, TEST_SIZE, TRAIN_SIZE};
use dlsr_core::degrade::decimate;
use dlsr_core::*;

fn main() -> Result<()> {
    let train: Vec<Image> = training_corpus(TRAIN_SIZE).into_iter().map(|n| n.image).collect();
    let ts = build_training_set(&train, &BuildConfig::default())?;
    let wts = wm2_build(&train)?;
    let tests = test_corpus(TEST_SIZE);
    let mut sums = [0.0; 3];
    println!("image,cubic,wm2,directionlet");
    for n in &tests {
        let lr = decimate(&n.image, 2)?;
        let cubic = mse(&n.image, &cubic_spline_upsample(&lr, 2))?;
        let wm2 = mse(&n.image, &wm2_super_resolve(&lr, &wts)?)?;
        let dir = mse(&n.image, &super_resolve(&lr, &ts, &SrConfig::default())?.0)?;
        println!("{},{cubic:.6},{wm2:.6},{dir:.6}", n.name);
        for (s, v) in sums.iter_mut().zip([cubic, wm2, dir]) {
            *s += v;
        }
    }
    let k = tests.len() as f64;
    println!("average,{:.6},{:.6},{:.6}", sums[0] / k, sums[1] / k, sums[2] / k);
    Ok(())
}
