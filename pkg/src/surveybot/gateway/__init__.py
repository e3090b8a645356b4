"""HTTP surface: webhook, loopback channel, outbound sender, profile fetch."""
