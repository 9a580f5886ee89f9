//! Registrable domains (eTLD+1) from the bundled public suffix list.

use super::normalize::is_ip_literal;

/// Returns the registrable domain of a normalized host.
///
/// IP literals are returned unchanged. Hosts that are themselves a public
/// suffix, or that the list cannot resolve, fall back to their last two labels.
pub fn registrable_domain(host: &str) -> String {
    if is_ip_literal(host) {
        return host.to_string();
    }
    if let Some(domain) = psl::domain_str(host) {
        return domain.to_string();
    }
    last_two_labels(host)
}

fn last_two_labels(host: &str) -> String {
    let labels: Vec<&str> = host.rsplitn(3, '.').collect();
    match labels.as_slice() {
        [tld, sld, ..] => format!("{sld}.{tld}"),
        _ => host.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_suffixes() {
        assert_eq!(registrable_domain("data.harvard.edu"), "harvard.edu");
        assert_eq!(registrable_domain("github.com"), "github.com");
        assert_eq!(registrable_domain("a.b.co.uk"), "b.co.uk");
        assert_eq!(registrable_domain("archive.stsci.nasa.gov"), "nasa.gov");
    }

    #[test]
    fn unknown_suffix_uses_last_two_labels() {
        assert_eq!(registrable_domain("a.b.example.zzqq"), "example.zzqq");
        assert_eq!(registrable_domain("alpha.test"), "alpha.test");
    }

    #[test]
    fn bare_public_suffix_falls_back() {
        assert_eq!(registrable_domain("co.uk"), "co.uk");
    }

    #[test]
    fn ip_unchanged() {
        assert_eq!(registrable_domain("192.168.0.1"), "192.168.0.1");
        assert_eq!(registrable_domain("[::1]"), "[::1]");
    }

    #[test]
    fn is_suffix_of_host() {
        for host in ["x.y.github.io", "www.nature.com", "a.b.c.d.ac.jp", "zenodo.org"] {
            assert!(host.ends_with(&registrable_domain(host)), "{host}");
        }
    }
}
