"""SLEMs of the embedded G1/G2 chains next to the chains built from scratch."""
from effsgd.harness.report import format_slem_table, reproduce_slem_table

if __name__ == "__main__":
    print(format_slem_table(reproduce_slem_table()))
