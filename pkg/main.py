from uclab.cli import cli


def main():
    cli(prog_name='uclab')


if __name__ == "__main__":
    main()
