use qfst::{f1_qfst, Simulator};

#[test]
fn library_example() -> Result<(), Box<dyn std::error::Error>> {
    let machine = f1_qfst::<f64>();
    let sim = Simulator::new(&machine)?;
    let run = sim.run("abcab")?;
    assert!((run.accept_on("ab") - 2.0 / 3.0).abs() < 1e-12);
    Ok(())
}
