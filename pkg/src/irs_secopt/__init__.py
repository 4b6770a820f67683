"""Secrecy-rate optimization for IRS-assisted MIMO wiretap links."""
