//! CSV emission shared by the metric and analysis reports. Every report
//! carries its header row, even when there are no data rows.

use serde::de::DeserializeOwned;
use serde::Serialize;

pub(crate) fn csv_string<T: Serialize>(
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub(crate) fn read_csv<T: DeserializeOwned, R: std::io::Read>(
    reader: R,
) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}
