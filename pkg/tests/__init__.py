"""Tests for ocrprep"""
