"""Tests for the Skeleton MCP Server."""
