fn main() {
    eprintln!("periodlab: suites not wired yet");
}
