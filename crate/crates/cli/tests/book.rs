//! Replays the `console` transcripts in the command-line chapter of the book.

use std::process::Command;

#[test]
fn console_transcripts_match() {
    let chapter = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../book/src/cli.md")).unwrap();
    let mut blocks = 0;
    let mut lines = chapter.lines();
    while let Some(line) = lines.next() {
        if line != "```console" {
            continue;
        }
        let body: Vec<&str> = lines.by_ref().take_while(|l| *l != "```").collect();
        let mut i = 0;
        while i < body.len() {
            let args = body[i].strip_prefix("$ slmdecay ").expect("block starts with a command");
            let mut expected = String::new();
            i += 1;
            while i < body.len() && !body[i].starts_with("$ ") {
                expected.push_str(body[i]);
                expected.push('\n');
                i += 1;
            }
            let out = Command::new(env!("CARGO_BIN_EXE_slmdecay")).args(args.split(' ')).output().unwrap();
            let got = if out.status.success() { out.stdout } else { out.stderr };
            assert_eq!(String::from_utf8(got).unwrap(), expected, "slmdecay {args}");
            blocks += 1;
        }
    }
    assert_eq!(blocks, 7);
}
