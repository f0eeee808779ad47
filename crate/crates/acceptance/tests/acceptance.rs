use betlab_acceptance::{determinism, grapa_kt_coincidence, randomized_studies, Scale};

const WORKERS: usize = 4;

fn main() {
    let mut outcomes = Vec::new();
    let studies = randomized_studies();
    for (i, study) in studies.iter().enumerate() {
        if i == 6 {
            outcomes.push(grapa_kt_coincidence());
            println!("{}", outcomes.last().unwrap().line());
        }
        outcomes.push(study(Scale::full(WORKERS)));
        println!("{}", outcomes.last().unwrap().line());
    }
    outcomes.push(determinism(10, &[1, WORKERS]));
    println!("{}", outcomes.last().unwrap().line());

    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass()).map(|o| o.id).collect();
    println!(
        "acceptance: {}/{} criteria passed{}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        if failed.is_empty() { String::new() } else { format!(", failed {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
